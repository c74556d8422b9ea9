//! Instance model: two vertex sides with quota intervals and strict,
//! mutually consistent preference lists.
//!
//! Text format, one record per line, `#` starts a comment:
//!
//! ```text
//! A <name> <qminus> <qplus>
//! B <name> <qminus> <qplus>
//! PREF <name> <n1> <n2> ...
//! ```
//!
//! All declarations precede the PREF lines and every declared vertex has
//! exactly one PREF line, possibly empty. Vertex order is file order.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

/// A vertex, addressed by side and its ordinal within that side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub side: Side,
    pub index: usize,
}

impl VertexId {
    pub fn a(index: usize) -> Self {
        VertexId {
            side: Side::A,
            index,
        }
    }

    pub fn b(index: usize) -> Self {
        VertexId {
            side: Side::B,
            index,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Quotas {
    pub lower: usize,
    pub upper: usize,
}

impl Quotas {
    pub fn new(lower: usize, upper: usize) -> Self {
        Quotas { lower, upper }
    }

    /// Spare capacity above the lower quota.
    pub fn slack(&self) -> usize {
        self.upper.saturating_sub(self.lower)
    }
}

/// One declared vertex. `pref` holds ordinals on the opposite side,
/// most preferred first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub quotas: Quotas,
    pub pref: Vec<usize>,
}

impl Vertex {
    pub fn new(name: impl Into<String>, lower: usize, upper: usize, pref: Vec<usize>) -> Self {
        Vertex {
            name: name.into(),
            quotas: Quotas::new(lower, upper),
            pref,
        }
    }
}

/// An acceptable pair, always written A-side first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        Edge { a, b }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    a: Vec<Vertex>,
    b: Vec<Vertex>,
    rank_a: Vec<HashMap<usize, usize>>,
    rank_b: Vec<HashMap<usize, usize>>,
    edges: Vec<Edge>,
    edge_index: HashMap<Edge, usize>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }
}

impl Eq for Instance {}

fn rank_table(vertices: &[Vertex]) -> Vec<HashMap<usize, usize>> {
    vertices
        .iter()
        .map(|v| {
            let mut ranks = HashMap::with_capacity(v.pref.len());
            for (r, &u) in v.pref.iter().enumerate() {
                ranks.entry(u).or_insert(r);
            }
            ranks
        })
        .collect()
}

impl Instance {
    /// Builds an instance and rejects it if any invariant is violated.
    pub fn new(a: Vec<Vertex>, b: Vec<Vertex>) -> Result<Self, ValidationReport> {
        let inst = Self::from_parts_unchecked(a, b);
        let report = inst.validate();
        if report.is_valid() {
            Ok(inst)
        } else {
            Err(report)
        }
    }

    /// Builds the derived tables without checking invariants. The edge set
    /// is taken from pairs listed on both sides.
    pub fn from_parts_unchecked(a: Vec<Vertex>, b: Vec<Vertex>) -> Self {
        let rank_a = rank_table(&a);
        let rank_b = rank_table(&b);
        let mut edges: Vec<Edge> = Vec::new();
        for (ai, va) in a.iter().enumerate() {
            for &bi in &va.pref {
                if bi < b.len() && rank_b[bi].contains_key(&ai) {
                    edges.push(Edge::new(ai, bi));
                }
            }
        }
        edges.sort();
        edges.dedup();
        let edge_index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Instance {
            a,
            b,
            rank_a,
            rank_b,
            edges,
            edge_index,
        }
    }

    pub fn a_vertices(&self) -> &[Vertex] {
        &self.a
    }

    pub fn b_vertices(&self) -> &[Vertex] {
        &self.b
    }

    pub fn n_a(&self) -> usize {
        self.a.len()
    }

    pub fn n_b(&self) -> usize {
        self.b.len()
    }

    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::A => self.a.len(),
            Side::B => self.b.len(),
        }
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        match v.side {
            Side::A => &self.a[v.index],
            Side::B => &self.b[v.index],
        }
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.vertex(v).name
    }

    pub fn quotas(&self, v: VertexId) -> Quotas {
        self.vertex(v).quotas
    }

    pub fn pref(&self, v: VertexId) -> &[usize] {
        &self.vertex(v).pref
    }

    /// All vertex ids, A side first, each side in file order.
    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.a.len())
            .map(VertexId::a)
            .chain((0..self.b.len()).map(VertexId::b))
    }

    /// Position of `u` (an opposite-side ordinal) in the list of `v`.
    pub fn rank(&self, v: VertexId, u: usize) -> Option<usize> {
        match v.side {
            Side::A => self.rank_a.get(v.index)?.get(&u).copied(),
            Side::B => self.rank_b.get(v.index)?.get(&u).copied(),
        }
    }

    /// Edges sorted by (a, b).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        self.edge_index.get(&e).copied()
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edge_index.contains_key(&e)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.pref(v).len()
    }

    /// Sum of A-side lower quotas.
    pub fn s(&self) -> usize {
        self.a.iter().map(|v| v.quotas.lower).sum()
    }

    /// Sum of B-side lower quotas.
    pub fn t(&self) -> usize {
        self.b.iter().map(|v| v.quotas.lower).sum()
    }

    /// Preference list of `a` restricted to B vertices with a positive
    /// lower quota, order preserved.
    pub fn pref_lq(&self, a: usize) -> Vec<usize> {
        self.a[a]
            .pref
            .iter()
            .copied()
            .filter(|&b| self.b[b].quotas.lower > 0)
            .collect()
    }

    pub fn find(&self, name: &str) -> Option<VertexId> {
        self.a
            .iter()
            .position(|v| v.name == name)
            .map(VertexId::a)
            .or_else(|| self.b.iter().position(|v| v.name == name).map(VertexId::b))
    }

    /// Lists every violated invariant, plus warnings for lower quotas that
    /// exceed the degree.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut names = HashSet::new();
        for v in self.a.iter().chain(self.b.iter()) {
            if !names.insert(v.name.as_str()) {
                report
                    .violations
                    .push(Violation::DuplicateName(v.name.clone()));
            }
        }
        for id in self.vertex_ids().collect::<Vec<_>>() {
            let v = self.vertex(id);
            let q = v.quotas;
            if q.upper == 0 {
                report.violations.push(Violation::ZeroUpper(v.name.clone()));
            }
            if q.lower > q.upper {
                report.violations.push(Violation::LowerExceedsUpper {
                    vertex: v.name.clone(),
                    lower: q.lower,
                    upper: q.upper,
                });
            }
            let other_len = match id.side {
                Side::A => self.b.len(),
                Side::B => self.a.len(),
            };
            let mut seen = HashSet::new();
            for &u in &v.pref {
                if u >= other_len {
                    report.violations.push(Violation::OutOfRange {
                        vertex: v.name.clone(),
                        index: u,
                    });
                    continue;
                }
                let other = VertexId {
                    side: id.side.other(),
                    index: u,
                };
                if !seen.insert(u) {
                    report.violations.push(Violation::DuplicatePreference {
                        vertex: v.name.clone(),
                        partner: self.name(other).to_string(),
                    });
                }
                if self.rank(other, id.index).is_none() {
                    report.violations.push(Violation::NonMutual {
                        from: v.name.clone(),
                        to: self.name(other).to_string(),
                    });
                }
            }
            if q.lower > v.pref.len() {
                report.warnings.push(Warning::UnsatisfiableLowerQuota {
                    vertex: v.name.clone(),
                    lower: q.lower,
                    degree: v.pref.len(),
                });
            }
        }
        report
    }

    /// Line-based text form; parses back to an equal instance.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for v in &self.a {
            out.push_str(&format!(
                "A {} {} {}\n",
                v.name, v.quotas.lower, v.quotas.upper
            ));
        }
        for v in &self.b {
            out.push_str(&format!(
                "B {} {} {}\n",
                v.name, v.quotas.lower, v.quotas.upper
            ));
        }
        for v in &self.a {
            out.push_str("PREF ");
            out.push_str(&v.name);
            for &b in &v.pref {
                out.push(' ');
                out.push_str(&self.b[b].name);
            }
            out.push('\n');
        }
        for v in &self.b {
            out.push_str("PREF ");
            out.push_str(&v.name);
            for &a in &v.pref {
                out.push(' ');
                out.push_str(&self.a[a].name);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_instance(text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateName(String),
    ZeroUpper(String),
    LowerExceedsUpper {
        vertex: String,
        lower: usize,
        upper: usize,
    },
    OutOfRange {
        vertex: String,
        index: usize,
    },
    DuplicatePreference {
        vertex: String,
        partner: String,
    },
    NonMutual {
        from: String,
        to: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateName(n) => write!(f, "duplicate vertex name `{n}`"),
            Violation::ZeroUpper(n) => write!(f, "`{n}`: upper quota is zero"),
            Violation::LowerExceedsUpper {
                vertex,
                lower,
                upper,
            } => write!(f, "`{vertex}`: lower exceeds upper ({lower} > {upper})"),
            Violation::OutOfRange { vertex, index } => {
                write!(f, "`{vertex}`: preference entry {index} out of range")
            }
            Violation::DuplicatePreference { vertex, partner } => {
                write!(f, "`{vertex}`: duplicate preference entry `{partner}`")
            }
            Violation::NonMutual { from, to } => {
                write!(f, "non-mutual preference: `{from}` lists `{to}`")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Warning {
    /// The vertex is deficient in every matching.
    UnsatisfiableLowerQuota {
        vertex: String,
        lower: usize,
        degree: usize,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::UnsatisfiableLowerQuota {
                vertex,
                lower,
                degree,
            } => write!(
                f,
                "`{vertex}`: unsatisfiable lower quota ({lower} > degree {degree})"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "error: {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Strips a `#` comment and splits on whitespace.
pub(crate) fn tokens(line: &str) -> Vec<&str> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    body.split_whitespace().collect()
}

fn parse_count(tok: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    tok.parse::<usize>().map_err(|_| ParseError::Syntax {
        line,
        message: format!("{what} `{tok}` is not a non-negative integer"),
    })
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut a: Vec<Vertex> = Vec::new();
    let mut b: Vec<Vertex> = Vec::new();
    let mut by_name: HashMap<String, VertexId> = HashMap::new();
    let mut pref_seen: HashSet<VertexId> = HashSet::new();
    let mut in_prefs = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(raw);
        let Some(&head) = toks.first() else { continue };
        match head {
            "A" | "B" => {
                if in_prefs {
                    return Err(ParseError::Syntax {
                        line,
                        message: "vertex declaration after PREF lines".into(),
                    });
                }
                if toks.len() != 4 {
                    return Err(ParseError::Syntax {
                        line,
                        message: format!("expected `{head} <name> <qminus> <qplus>`"),
                    });
                }
                let name = toks[1].to_string();
                let lower = parse_count(toks[2], line, "lower quota")?;
                let upper = parse_count(toks[3], line, "upper quota")?;
                if by_name.contains_key(&name) {
                    return Err(ParseError::DuplicateVertex { line, name });
                }
                if lower > upper {
                    return Err(ParseError::LowerExceedsUpper { name, lower, upper });
                }
                if upper == 0 {
                    return Err(ParseError::ZeroUpper { name });
                }
                let (side_vec, id) = if head == "A" {
                    let id = VertexId::a(a.len());
                    (&mut a, id)
                } else {
                    let id = VertexId::b(b.len());
                    (&mut b, id)
                };
                by_name.insert(name.clone(), id);
                side_vec.push(Vertex::new(name, lower, upper, Vec::new()));
            }
            "PREF" => {
                in_prefs = true;
                if toks.len() < 2 {
                    return Err(ParseError::Syntax {
                        line,
                        message: "expected `PREF <name> ...`".into(),
                    });
                }
                let owner_name = toks[1];
                let owner = *by_name
                    .get(owner_name)
                    .ok_or_else(|| ParseError::UnknownVertex {
                        line,
                        name: owner_name.to_string(),
                    })?;
                if !pref_seen.insert(owner) {
                    return Err(ParseError::DuplicatePrefLine {
                        line,
                        name: owner_name.to_string(),
                    });
                }
                let mut list = Vec::with_capacity(toks.len() - 2);
                let mut seen = HashSet::new();
                for &tok in &toks[2..] {
                    let other = *by_name.get(tok).ok_or_else(|| ParseError::UnknownVertex {
                        line,
                        name: tok.to_string(),
                    })?;
                    if other.side == owner.side {
                        return Err(ParseError::SameSidePreference {
                            line,
                            owner: owner_name.to_string(),
                            name: tok.to_string(),
                        });
                    }
                    if !seen.insert(other.index) {
                        return Err(ParseError::DuplicatePreference {
                            line,
                            owner: owner_name.to_string(),
                            name: tok.to_string(),
                        });
                    }
                    list.push(other.index);
                }
                match owner.side {
                    Side::A => a[owner.index].pref = list,
                    Side::B => b[owner.index].pref = list,
                }
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("unknown record `{other}`"),
                })
            }
        }
    }

    for v in a.iter().chain(b.iter()) {
        let id = by_name[&v.name];
        if !pref_seen.contains(&id) {
            return Err(ParseError::MissingPrefLine {
                name: v.name.clone(),
            });
        }
    }

    let inst = Instance::from_parts_unchecked(a, b);
    if let Some(v) = inst.validate().violations.into_iter().next() {
        return Err(match v {
            Violation::NonMutual { from, to } => ParseError::NonMutual { from, to },
            other => ParseError::Syntax {
                line: 0,
                message: other.to_string(),
            },
        });
    }
    Ok(inst)
}
