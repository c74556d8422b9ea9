//! Many-to-many matchings, deficiency accounting and blocking pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{MatchingError, ParseError};
use crate::instance::{tokens, Edge, Instance, Side, VertexId};

/// A set of acceptable pairs. Validity against an instance (edges in E,
/// upper quotas respected) is checked by [`Matching::new`] and
/// [`Matching::validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    edges: BTreeSet<Edge>,
}

impl Matching {
    pub fn new(
        inst: &Instance,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, MatchingError> {
        let m = Self::from_edges_unchecked(edges);
        m.validate(inst)?;
        Ok(m)
    }

    pub fn from_edges_unchecked(edges: impl IntoIterator<Item = Edge>) -> Self {
        Matching {
            edges: edges.into_iter().collect(),
        }
    }

    /// Convenience constructor from `(a, b)` name pairs.
    pub fn from_names(inst: &Instance, pairs: &[(&str, &str)]) -> Result<Self, MatchingError> {
        let mut edges = Vec::with_capacity(pairs.len());
        for &(x, y) in pairs {
            let (Some(u), Some(v)) = (inst.find(x), inst.find(y)) else {
                return Err(MatchingError::NotAcceptable {
                    vertex: x.to_string(),
                    partner: y.to_string(),
                });
            };
            let e = match (u.side, v.side) {
                (Side::A, Side::B) => Edge::new(u.index, v.index),
                (Side::B, Side::A) => Edge::new(v.index, u.index),
                _ => {
                    return Err(MatchingError::NotAcceptable {
                        vertex: x.to_string(),
                        partner: y.to_string(),
                    })
                }
            };
            edges.push(e);
        }
        Self::new(inst, edges)
    }

    pub fn validate(&self, inst: &Instance) -> Result<(), MatchingError> {
        for &e in &self.edges {
            if !inst.has_edge(e) {
                return Err(MatchingError::NotAnEdge { a: e.a, b: e.b });
            }
        }
        let (pa, pb) = self.partner_lists(inst);
        for (i, p) in pa.iter().enumerate() {
            if p.len() > inst.a_vertices()[i].quotas.upper {
                return Err(MatchingError::OverQuota {
                    vertex: inst.a_vertices()[i].name.clone(),
                });
            }
        }
        for (j, p) in pb.iter().enumerate() {
            if p.len() > inst.b_vertices()[j].quotas.upper {
                return Err(MatchingError::OverQuota {
                    vertex: inst.b_vertices()[j].name.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    /// M(v), sorted by ordinal.
    pub fn partners(&self, v: VertexId) -> Vec<usize> {
        match v.side {
            Side::A => self
                .edges
                .iter()
                .filter(|e| e.a == v.index)
                .map(|e| e.b)
                .collect(),
            Side::B => self
                .edges
                .iter()
                .filter(|e| e.b == v.index)
                .map(|e| e.a)
                .collect(),
        }
    }

    /// Partner lists for every A vertex and every B vertex.
    pub fn partner_lists(&self, inst: &Instance) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let mut pa = vec![Vec::new(); inst.n_a()];
        let mut pb = vec![Vec::new(); inst.n_b()];
        for e in &self.edges {
            if e.a < pa.len() && e.b < pb.len() {
                pa[e.a].push(e.b);
                pb[e.b].push(e.a);
            }
        }
        (pa, pb)
    }

    /// Reads the `<a_name> <b_name>` per line format.
    pub fn parse(inst: &Instance, text: &str) -> Result<Self, ParseError> {
        let mut edges = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks = tokens(raw);
            if toks.is_empty() {
                continue;
            }
            if toks.len() != 2 {
                return Err(ParseError::Syntax {
                    line,
                    message: "expected `<a_name> <b_name>`".into(),
                });
            }
            let lookup = |name: &str, side: Side| match inst.find(name) {
                Some(v) if v.side == side => Ok(v.index),
                Some(_) => Err(ParseError::Syntax {
                    line,
                    message: format!("`{name}` is not a {side}-side vertex"),
                }),
                None => Err(ParseError::UnknownVertex {
                    line,
                    name: name.to_string(),
                }),
            };
            let e = Edge::new(lookup(toks[0], Side::A)?, lookup(toks[1], Side::B)?);
            if !inst.has_edge(e) {
                return Err(ParseError::NotAnEdge {
                    line,
                    a: toks[0].to_string(),
                    b: toks[1].to_string(),
                });
            }
            if !edges.insert(e) {
                return Err(ParseError::DuplicatePair {
                    line,
                    a: toks[0].to_string(),
                    b: toks[1].to_string(),
                });
            }
        }
        let m = Matching { edges };
        if let Err(MatchingError::OverQuota { vertex }) = m.validate(inst) {
            return Err(ParseError::OverQuota { name: vertex });
        }
        Ok(m)
    }

    pub fn serialize(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for e in &self.edges {
            out.push_str(&inst.a_vertices()[e.a].name);
            out.push(' ');
            out.push_str(&inst.b_vertices()[e.b].name);
            out.push('\n');
        }
        out
    }

    /// `{(a1,b1), (a2,b2)}` style rendering with vertex names.
    pub fn display<'a>(&'a self, inst: &'a Instance) -> impl fmt::Display + 'a {
        DisplayMatching { m: self, inst }
    }
}

struct DisplayMatching<'a> {
    m: &'a Matching,
    inst: &'a Instance,
}

impl fmt::Display for DisplayMatching<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.m.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(
                f,
                "({},{})",
                self.inst.a_vertices()[e.a].name,
                self.inst.b_vertices()[e.b].name
            )?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeficiencyReport {
    pub def_a: usize,
    pub def_b: usize,
    pub total: usize,
    pub per_vertex: BTreeMap<VertexId, usize>,
}

pub fn deficiency(inst: &Instance, m: &Matching) -> Result<DeficiencyReport, MatchingError> {
    for e in m.edges() {
        if !inst.has_edge(e) {
            return Err(MatchingError::NotAnEdge { a: e.a, b: e.b });
        }
    }
    let (pa, pb) = m.partner_lists(inst);
    let mut per_vertex = BTreeMap::new();
    let mut def_a = 0;
    let mut def_b = 0;
    for (i, v) in inst.a_vertices().iter().enumerate() {
        let d = v.quotas.lower.saturating_sub(pa[i].len());
        def_a += d;
        per_vertex.insert(VertexId::a(i), d);
    }
    for (j, v) in inst.b_vertices().iter().enumerate() {
        let d = v.quotas.lower.saturating_sub(pb[j].len());
        def_b += d;
        per_vertex.insert(VertexId::b(j), d);
    }
    Ok(DeficiencyReport {
        def_a,
        def_b,
        total: def_a + def_b,
        per_vertex,
    })
}

/// True iff no vertex is deficient. Edges outside E count as infeasible.
pub fn is_feasible(inst: &Instance, m: &Matching) -> bool {
    deficiency(inst, m).map(|d| d.total == 0).unwrap_or(false)
}

/// Pairs of E outside `m` where both endpoints are under-subscribed or
/// prefer the other to one of their current partners.
pub fn blocking_pairs(inst: &Instance, m: &Matching) -> Vec<Edge> {
    let (pa, pb) = m.partner_lists(inst);
    let wants = |v: VertexId, partners: &[usize], u: usize| -> bool {
        if partners.len() < inst.quotas(v).upper {
            return true;
        }
        let r = inst.rank(v, u).unwrap_or(usize::MAX);
        partners
            .iter()
            .any(|&p| inst.rank(v, p).unwrap_or(usize::MAX) > r)
    };
    inst.edges()
        .iter()
        .copied()
        .filter(|&e| !m.contains(e))
        .filter(|&e| {
            wants(VertexId::a(e.a), &pa[e.a], e.b) && wants(VertexId::b(e.b), &pb[e.b], e.a)
        })
        .collect()
}
