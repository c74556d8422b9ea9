//! Popularity certificate for a solver output.
//!
//! The many-to-many matching is expanded into a one-to-one matching `M*`
//! on a cloned graph: every vertex gets one clone per unit of upper
//! quota, spare capacity above the lower quota is absorbed by the
//! vertex's own last-resorts, and unavoidable deficiency by shared dummy
//! vertices. Edge weights record how the endpoints vote for an edge
//! against their `M*` partners. A dual solution read off the level
//! partition that is feasible and sums to zero bounds every perfect
//! matching of the cloned graph, and hence every critical rival, by zero.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use crate::error::MatchingError;
use crate::instance::{Edge, Instance, Side, VertexId};
use crate::matching::{deficiency, Matching};
use crate::popularity::{vote, Correspondence};
use crate::solver::LeveledMatching;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CloneKind {
    CloneA,
    CloneB,
    LastResortA,
    LastResortB,
    DummyA,
    DummyB,
}

impl CloneKind {
    fn is_true(self) -> bool {
        matches!(self, CloneKind::CloneA | CloneKind::CloneB)
    }

    fn is_artificial(self) -> bool {
        !self.is_true()
    }
}

/// A vertex of the cloned graph. Clones and last-resorts belong to an
/// instance vertex; dummies belong to none. Ordinals start at 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CloneId {
    pub kind: CloneKind,
    pub owner: Option<VertexId>,
    pub ordinal: usize,
}

/// Side of the cloned graph's bipartition. The A side holds A clones,
/// B last-resorts and B dummies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PartSide {
    A,
    B,
}

impl fmt::Display for PartSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartSide::A => "A",
            PartSide::B => "B",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: CloneId,
    pub side: PartSide,
    pub level: usize,
}

/// Edge of the cloned graph, `u` on the A side and `v` on the B side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CloneEdge {
    pub u: usize,
    pub v: usize,
    pub weight: i64,
}

#[derive(Clone, Debug)]
pub struct ClonedGraph {
    nodes: Vec<Node>,
    labels: Vec<String>,
    index: HashMap<CloneId, usize>,
    edges: Vec<CloneEdge>,
    edge_index: HashMap<(usize, usize), usize>,
    mstar: Vec<Option<usize>>,
    base: Matching,
    lower_a: Vec<usize>,
    lower_b: Vec<usize>,
    s: usize,
    t: usize,
}

impl ClonedGraph {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn find(&self, id: CloneId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Printable id: `A:a1:1`, `LB:b2:1`, `DA:1`, ordinals 1-based.
    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn edges(&self) -> &[CloneEdge] {
        &self.edges
    }

    pub fn edge(&self, u: usize, v: usize) -> Option<&CloneEdge> {
        self.edge_index.get(&(u, v)).map(|&k| &self.edges[k])
    }

    /// Partner of node `i` in `M*`.
    pub fn mstar(&self, i: usize) -> Option<usize> {
        self.mstar[i]
    }

    /// The matching the graph was built from.
    pub fn base(&self) -> &Matching {
        &self.base
    }

    pub fn count(&self, kind: CloneKind) -> usize {
        self.nodes.iter().filter(|n| n.id.kind == kind).count()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    fn kind(&self, i: usize) -> CloneKind {
        self.nodes[i].id.kind
    }

    fn clones_of(&self, v: VertexId) -> Vec<usize> {
        let kind = match v.side {
            Side::A => CloneKind::CloneA,
            Side::B => CloneKind::CloneB,
        };
        self.owned(kind, v)
    }

    fn resorts_of(&self, v: VertexId) -> Vec<usize> {
        let kind = match v.side {
            Side::A => CloneKind::LastResortA,
            Side::B => CloneKind::LastResortB,
        };
        self.owned(kind, v)
    }

    fn owned(&self, kind: CloneKind, v: VertexId) -> Vec<usize> {
        (0..)
            .map_while(|ordinal| {
                self.find(CloneId {
                    kind,
                    owner: Some(v),
                    ordinal,
                })
            })
            .collect()
    }

    fn dummies(&self, kind: CloneKind) -> Vec<usize> {
        (0..)
            .map_while(|ordinal| {
                self.find(CloneId {
                    kind,
                    owner: None,
                    ordinal,
                })
            })
            .collect()
    }

    /// Orients a pair of nodes as (A side, B side).
    fn orient(&self, x: usize, y: usize) -> (usize, usize) {
        if self.nodes[x].side == PartSide::A {
            (x, y)
        } else {
            (y, x)
        }
    }
}

struct Builder<'a> {
    inst: &'a Instance,
    nodes: Vec<Node>,
    labels: Vec<String>,
    index: HashMap<CloneId, usize>,
}

impl Builder<'_> {
    fn add(&mut self, id: CloneId) -> usize {
        let side = match id.kind {
            CloneKind::CloneA | CloneKind::LastResortB | CloneKind::DummyB => PartSide::A,
            _ => PartSide::B,
        };
        let name =
            |v: Option<VertexId>| v.map(|v| self.inst.name(v).to_string()).unwrap_or_default();
        let k = id.ordinal + 1;
        let label = match id.kind {
            CloneKind::CloneA => format!("A:{}:{k}", name(id.owner)),
            CloneKind::CloneB => format!("B:{}:{k}", name(id.owner)),
            CloneKind::LastResortA => format!("LA:{}:{k}", name(id.owner)),
            CloneKind::LastResortB => format!("LB:{}:{k}", name(id.owner)),
            CloneKind::DummyA => format!("DA:{k}"),
            CloneKind::DummyB => format!("DB:{k}"),
        };
        let i = self.nodes.len();
        self.nodes.push(Node { id, side, level: 0 });
        self.labels.push(label);
        self.index.insert(id, i);
        i
    }
}

/// Builds the cloned graph, `M*`, the level partition and edge weights
/// for a leveled matching. Clones, last-resorts and dummies are consumed
/// in ascending ordinal order.
pub fn build_cloned_graph(
    inst: &Instance,
    m: &LeveledMatching,
) -> Result<ClonedGraph, MatchingError> {
    m.validate(inst)?;
    let (s, t) = (inst.s(), inst.t());
    let top = s + t + 1;
    let mut b = Builder {
        inst,
        nodes: Vec::new(),
        labels: Vec::new(),
        index: HashMap::new(),
    };

    let mut clones: HashMap<VertexId, Vec<usize>> = HashMap::new();
    let mut resorts: HashMap<VertexId, Vec<usize>> = HashMap::new();
    for v in inst.vertex_ids() {
        let q = inst.quotas(v);
        let (ck, lk) = match v.side {
            Side::A => (CloneKind::CloneA, CloneKind::LastResortA),
            Side::B => (CloneKind::CloneB, CloneKind::LastResortB),
        };
        let cs = (0..q.upper)
            .map(|ordinal| {
                b.add(CloneId {
                    kind: ck,
                    owner: Some(v),
                    ordinal,
                })
            })
            .collect();
        let ls = (0..q.slack())
            .map(|ordinal| {
                b.add(CloneId {
                    kind: lk,
                    owner: Some(v),
                    ordinal,
                })
            })
            .collect();
        clones.insert(v, cs);
        resorts.insert(v, ls);
    }

    let mut mstar: Vec<Option<usize>> = vec![None; b.nodes.len()];
    let mut used: HashMap<VertexId, usize> = HashMap::new();
    let mut level: HashMap<usize, usize> = HashMap::new();
    let pair = |mstar: &mut Vec<Option<usize>>, x: usize, y: usize| {
        if mstar.len() <= x.max(y) {
            mstar.resize(x.max(y) + 1, None);
        }
        mstar[x] = Some(y);
        mstar[y] = Some(x);
    };

    for e in m.base.edges() {
        let (va, vb) = (VertexId::a(e.a), VertexId::b(e.b));
        let x = m
            .level_of(e)
            .ok_or(MatchingError::MissingLevel { a: e.a, b: e.b })?;
        let ia = clones[&va][*used.entry(va).or_insert(0)];
        let ib = clones[&vb][*used.entry(vb).or_insert(0)];
        *used.get_mut(&va).expect("just inserted") += 1;
        *used.get_mut(&vb).expect("just inserted") += 1;
        pair(&mut mstar, ia, ib);
        level.insert(ia, x);
        level.insert(ib, x);
    }

    let mut dummy_count = [0usize; 2];
    for v in inst.vertex_ids() {
        let q = inst.quotas(v);
        let held = m.base.partners(v).len();
        let mut next = held;
        for _ in 0..q.lower.saturating_sub(held) {
            let c = clones[&v][next];
            next += 1;
            let (kind, slot, lc, ld) = match v.side {
                Side::A => (CloneKind::DummyA, 0, top, top),
                Side::B => (CloneKind::DummyB, 1, 0, 0),
            };
            let d = b.add(CloneId {
                kind,
                owner: None,
                ordinal: dummy_count[slot],
            });
            dummy_count[slot] += 1;
            pair(&mut mstar, c, d);
            level.insert(c, lc);
            level.insert(d, ld);
        }
        let (lc, ll) = match v.side {
            Side::A => (t + 1, t + 1),
            Side::B => (t, t),
        };
        for (k, &c) in clones[&v][next..].iter().enumerate() {
            let l = resorts[&v][k];
            pair(&mut mstar, c, l);
            level.insert(c, lc);
            level.insert(l, ll);
        }
        // Unmatched last-resorts sit on the same level as the matched ones.
        for &l in &resorts[&v] {
            level.entry(l).or_insert(ll);
        }
    }
    mstar.resize(b.nodes.len(), None);
    for (i, n) in b.nodes.iter_mut().enumerate() {
        n.level = level.get(&i).copied().unwrap_or(0);
    }

    let Builder {
        nodes,
        labels,
        index,
        ..
    } = b;
    let mut g = ClonedGraph {
        nodes,
        labels,
        index,
        edges: Vec::new(),
        edge_index: HashMap::new(),
        mstar,
        base: m.base.clone(),
        lower_a: inst.a_vertices().iter().map(|v| v.quotas.lower).collect(),
        lower_b: inst.b_vertices().iter().map(|v| v.quotas.lower).collect(),
        s,
        t,
    };

    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, p) in g.mstar.iter().enumerate() {
        if let Some(j) = *p {
            pairs.insert(g.orient(i, j));
        }
    }
    for &e in inst.edges() {
        if m.base.contains(e) {
            continue;
        }
        for &ca in &clones[&VertexId::a(e.a)] {
            for &cb in &clones[&VertexId::b(e.b)] {
                pairs.insert((ca, cb));
            }
        }
    }
    let da = g.dummies(CloneKind::DummyA);
    let db = g.dummies(CloneKind::DummyB);
    for v in inst.vertex_ids() {
        for &c in &clones[&v] {
            for &d in if v.side == Side::A { &da } else { &db } {
                pairs.insert(g.orient(c, d));
            }
        }
        let over = m.base.partners(v).len() > inst.quotas(v).lower;
        for &c in &clones[&v] {
            let on_resort = g.mstar[c].is_some_and(|p| {
                matches!(g.kind(p), CloneKind::LastResortA | CloneKind::LastResortB)
            });
            if over || on_resort {
                for &l in &resorts[&v] {
                    pairs.insert(g.orient(c, l));
                }
            }
        }
    }
    for (u, v) in pairs {
        let weight = raw_weight(&g, inst, u, v)?;
        g.edge_index.insert((u, v), g.edges.len());
        g.edges.push(CloneEdge { u, v, weight });
    }
    Ok(g)
}

/// Owner of the true clone `M*` pairs with node `i`, or the bottom symbol.
fn mstar_owner(g: &ClonedGraph, i: usize) -> Option<usize> {
    g.mstar[i]
        .filter(|&p| g.kind(p).is_true())
        .and_then(|p| g.nodes[p].id.owner)
        .map(|v| v.index)
}

fn raw_weight(g: &ClonedGraph, inst: &Instance, u: usize, v: usize) -> Result<i64, MatchingError> {
    let (ku, kv) = (g.kind(u), g.kind(v));
    if ku == CloneKind::CloneA && kv == CloneKind::CloneB {
        if g.mstar[u] == Some(v) {
            return Ok(0);
        }
        let a = g.nodes[u].id.owner.expect("clones have owners");
        let b = g.nodes[v].id.owner.expect("clones have owners");
        return Ok(vote(inst, a, Some(b.index), mstar_owner(g, u))?
            + vote(inst, b, Some(a.index), mstar_owner(g, v))?);
    }
    let clone = if ku.is_true() { u } else { v };
    let on_artificial = g.mstar[clone].is_some_and(|p| g.kind(p).is_artificial());
    Ok(if on_artificial { 0 } else { -1 })
}

/// Weight of the cloned-graph edge between nodes `x` and `y`.
pub fn edge_weight(g: &ClonedGraph, x: usize, y: usize) -> Result<i64, MatchingError> {
    let (u, v) = g.orient(x, y);
    g.edge(u, v)
        .map(|e| e.weight)
        .ok_or(MatchingError::NotInClonedGraph)
}

/// Dual values, one per node of the cloned graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub alpha: Vec<i64>,
}

impl DualCertificate {
    pub fn sum(&self) -> i64 {
        self.alpha.iter().sum()
    }
}

/// Closed-form dual: zero on last-resorts and on clones paired with one;
/// otherwise `2(t-L)+1` on A-side level `L` and its negation on the B
/// side.
pub fn dual_assignment(g: &ClonedGraph) -> Result<DualCertificate, MatchingError> {
    let t = g.t as i64;
    let max = g.s + g.t + 1;
    let mut alpha = Vec::with_capacity(g.nodes.len());
    for (i, n) in g.nodes.iter().enumerate() {
        if n.level > max {
            return Err(MatchingError::LevelOutOfRange {
                level: n.level,
                max,
            });
        }
        let resort = |k: CloneKind| matches!(k, CloneKind::LastResortA | CloneKind::LastResortB);
        let a = if resort(n.id.kind) || g.mstar[i].is_some_and(|p| resort(g.kind(p))) {
            0
        } else {
            let x = t - n.level as i64;
            match n.side {
                PartSide::A => 2 * x + 1,
                PartSide::B => -(2 * x + 1),
            }
        };
        alpha.push(a);
    }
    Ok(DualCertificate { alpha })
}

/// The individual conditions the verifier checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    /// The certificate has one value per node.
    Coverage,
    /// `alpha_u + alpha_v >= wt(u, v)` on every edge.
    EdgeFeasibility,
    /// Last-resorts carry non-negative values.
    ResortNonNegative,
    ZeroSum,
    /// No edge from A-side level `x` to B-side level `y < x - 1`.
    NoSteepEdge,
    /// Every `M*` edge is tight.
    MatchedTight,
    /// Every weight lies in `[-2, 2]`.
    WeightBounds,
    /// True edges within one level weigh at most 0.
    SameLevelWeight,
    /// True edges one level down weigh exactly -2.
    OneLevelDownWeight,
    /// `M*` covers every clone and dummy; last-resorts at most once.
    MStarPerfect,
    /// Clones above level `t+1` (A) or below `t` (B) see no last-resort.
    ResortAdjacency,
    /// At most `q-(a)` clones of `a` above `t+1`, at most `q-(b)` clones
    /// of `b` below `t`.
    PartitionCardinality,
}

impl Check {
    pub const ALL: [Check; 12] = [
        Check::Coverage,
        Check::EdgeFeasibility,
        Check::ResortNonNegative,
        Check::ZeroSum,
        Check::NoSteepEdge,
        Check::MatchedTight,
        Check::WeightBounds,
        Check::SameLevelWeight,
        Check::OneLevelDownWeight,
        Check::MStarPerfect,
        Check::ResortAdjacency,
        Check::PartitionCardinality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Coverage => "coverage",
            Check::EdgeFeasibility => "edge-feasibility",
            Check::ResortNonNegative => "last-resort-nonnegative",
            Check::ZeroSum => "zero-sum",
            Check::NoSteepEdge => "no-steep-edge",
            Check::MatchedTight => "matched-tight",
            Check::WeightBounds => "weight-bounds",
            Check::SameLevelWeight => "same-level-weight",
            Check::OneLevelDownWeight => "one-level-down-weight",
            Check::MStarPerfect => "mstar-perfect",
            Check::ResortAdjacency => "last-resort-adjacency",
            Check::PartitionCardinality => "partition-cardinality",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub failed: BTreeSet<Check>,
    pub sum: i64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }

    /// One line per node `<clone-id> <side> <level> <alpha>`, then
    /// `SUM <sum>` and `VERDICT PASS` or `VERDICT FAIL <checks>`.
    pub fn serialize(&self, g: &ClonedGraph, cert: &DualCertificate) -> String {
        let mut out = String::new();
        for (i, n) in g.nodes.iter().enumerate() {
            let a = cert.alpha.get(i).map_or("?".to_string(), |a| a.to_string());
            let _ = writeln!(out, "{} {} {} {}", g.labels[i], n.side, n.level, a);
        }
        let _ = writeln!(out, "SUM {}", self.sum);
        if self.passed() {
            out.push_str("VERDICT PASS\n");
        } else {
            let names: Vec<&str> = self.failed.iter().map(|c| c.name()).collect();
            let _ = writeln!(out, "VERDICT FAIL {}", names.join(","));
        }
        out
    }
}

/// Runs every check on a graph and a candidate dual.
pub fn verify_certificate(g: &ClonedGraph, cert: &DualCertificate) -> VerificationReport {
    let mut failed = BTreeSet::new();
    let sum = cert.sum();
    if cert.alpha.len() != g.nodes.len() {
        failed.insert(Check::Coverage);
        return VerificationReport { failed, sum };
    }
    let alpha = &cert.alpha;
    if sum != 0 {
        failed.insert(Check::ZeroSum);
    }
    let resort = |k: CloneKind| matches!(k, CloneKind::LastResortA | CloneKind::LastResortB);
    for (i, n) in g.nodes.iter().enumerate() {
        if resort(n.id.kind) && alpha[i] < 0 {
            failed.insert(Check::ResortNonNegative);
        }
    }
    for e in &g.edges {
        let (x, y) = (g.nodes[e.u].level, g.nodes[e.v].level);
        if alpha[e.u] + alpha[e.v] < e.weight {
            failed.insert(Check::EdgeFeasibility);
        }
        if x > y + 1 {
            failed.insert(Check::NoSteepEdge);
        }
        if !(-2..=2).contains(&e.weight) {
            failed.insert(Check::WeightBounds);
        }
        let is_true = g.kind(e.u).is_true() && g.kind(e.v).is_true();
        if is_true && x == y && e.weight > 0 {
            failed.insert(Check::SameLevelWeight);
        }
        if is_true && x == y + 1 && e.weight != -2 {
            failed.insert(Check::OneLevelDownWeight);
        }
        if g.mstar[e.u] == Some(e.v) && (alpha[e.u] + alpha[e.v] != e.weight || e.weight != 0) {
            failed.insert(Check::MatchedTight);
        }
        let (clone, other) = if g.kind(e.u).is_true() {
            (e.u, e.v)
        } else {
            (e.v, e.u)
        };
        if resort(g.kind(other)) {
            let c = &g.nodes[clone];
            let bad = match c.id.kind {
                CloneKind::CloneA => c.level > g.t + 1,
                CloneKind::CloneB => c.level < g.t,
                _ => false,
            };
            if bad {
                failed.insert(Check::ResortAdjacency);
            }
        }
    }
    for (i, n) in g.nodes.iter().enumerate() {
        let ok = match g.mstar[i] {
            Some(p) => {
                g.mstar[p] == Some(i) && g.edge(g.orient(i, p).0, g.orient(i, p).1).is_some()
            }
            None => resort(n.id.kind),
        };
        if !ok {
            failed.insert(Check::MStarPerfect);
        }
    }
    let mut high = vec![0usize; g.lower_a.len()];
    let mut low = vec![0usize; g.lower_b.len()];
    for n in &g.nodes {
        match (n.id.kind, n.id.owner) {
            (CloneKind::CloneA, Some(v)) if n.level > g.t + 1 => high[v.index] += 1,
            (CloneKind::CloneB, Some(v)) if n.level < g.t => low[v.index] += 1,
            _ => {}
        }
    }
    if high.iter().zip(&g.lower_a).any(|(h, q)| h > q)
        || low.iter().zip(&g.lower_b).any(|(l, q)| l > q)
    {
        failed.insert(Check::PartitionCardinality);
    }
    VerificationReport { failed, sum }
}

/// A one-to-one matching on the cloned graph, as (A side, B side) node
/// pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CloneMatching {
    pub pairs: Vec<(usize, usize)>,
}

impl CloneMatching {
    /// Total weight; fails if a pair is not an edge of the graph.
    pub fn weight(&self, g: &ClonedGraph) -> Result<i64, MatchingError> {
        self.pairs.iter().map(|&(u, v)| edge_weight(g, u, v)).sum()
    }

    /// Covers every clone and dummy exactly once and every last-resort
    /// at most once, using only edges of the graph.
    pub fn is_perfect(&self, g: &ClonedGraph) -> bool {
        let mut seen = vec![0usize; g.nodes.len()];
        for &(u, v) in &self.pairs {
            if g.edge(u, v).is_none() {
                return false;
            }
            seen[u] += 1;
            seen[v] += 1;
        }
        g.nodes.iter().zip(&seen).all(|(n, &k)| match n.id.kind {
            CloneKind::LastResortA | CloneKind::LastResortB => k <= 1,
            _ => k == 1,
        })
    }
}

/// Maps a critical rival `n` and a correspondence into the cloned graph.
/// `corr` pairs each vertex's `n`-only partners (first) with its
/// `M`-only partners (second), so that the weight of the image equals
/// `delta(inst, n, M, corr)`.
pub fn map_matching_to_clones(
    g: &ClonedGraph,
    inst: &Instance,
    n: &Matching,
    corr: &Correspondence,
) -> Result<CloneMatching, MatchingError> {
    let m = &g.base;
    corr.check(inst, n, m)?;
    let dn = deficiency(inst, n)?;
    let (dummies_a, dummies_b) = (g.count(CloneKind::DummyA), g.count(CloneKind::DummyB));
    if dn.def_a != dummies_a || dn.def_b != dummies_b {
        return Err(MatchingError::NotCritical {
            def_a: dn.def_a,
            def_b: dn.def_b,
            dummies_a,
            dummies_b,
        });
    }
    let fail = |msg: String| MatchingError::CloneMapping(msg);
    let mut taken = vec![false; g.nodes.len()];
    let mut out = CloneMatching::default();
    let take = |taken: &mut Vec<bool>, out: &mut CloneMatching, x: usize, y: usize| {
        taken[x] = true;
        taken[y] = true;
        out.pairs.push(g.orient(x, y));
    };

    // Clone of `v` that M* pairs with a clone of `w`.
    let clone_towards = |v: VertexId, w: VertexId| -> Option<usize> {
        g.clones_of(v).into_iter().find(|&c| {
            g.mstar[c]
                .and_then(|p| g.nodes[p].id.owner)
                .is_some_and(|o| o == w && g.kind(g.mstar[c].expect("checked")).is_true())
        })
    };
    // Free clone of `v` whose M* partner is a dummy, else a last-resort.
    let free_spare = |taken: &[bool], v: VertexId| -> Option<usize> {
        let cs = g.clones_of(v);
        let on = |c: usize, want: fn(CloneKind) -> bool| {
            !taken[c] && g.mstar[c].is_some_and(|p| want(g.kind(p)))
        };
        cs.iter()
            .copied()
            .find(|&c| on(c, |k| matches!(k, CloneKind::DummyA | CloneKind::DummyB)))
            .or_else(|| {
                cs.iter().copied().find(|&c| {
                    on(c, |k| {
                        matches!(k, CloneKind::LastResortA | CloneKind::LastResortB)
                    })
                })
            })
    };

    // (i) shared edges keep their M* clones.
    for e in n.edges().filter(|&e| m.contains(e)) {
        let ca = clone_towards(VertexId::a(e.a), VertexId::b(e.b))
            .ok_or_else(|| fail(format!("no M* edge for ({}, {})", e.a, e.b)))?;
        let cb = g.mstar[ca].expect("clone_towards returns matched clones");
        take(&mut taken, &mut out, ca, cb);
    }
    // (ii) new edges pick clones through the correspondence.
    for e in n.edges().filter(|&e| !m.contains(e)) {
        let (va, vb) = (VertexId::a(e.a), VertexId::b(e.b));
        let image = |v: VertexId, x: usize| {
            corr.image_of_first(v, x)
                .ok_or_else(|| fail(format!("correspondence misses {x} at {v:?}")))
        };
        let ca = match image(va, e.b)? {
            Some(b2) => clone_towards(va, VertexId::b(b2)),
            None => free_spare(&taken, va),
        }
        .ok_or_else(|| fail(format!("no clone of a#{} for ({}, {})", e.a, e.a, e.b)))?;
        let cb = match image(vb, e.a)? {
            Some(a2) => clone_towards(vb, VertexId::a(a2)),
            None => free_spare(&taken, vb),
        }
        .ok_or_else(|| fail(format!("no clone of b#{} for ({}, {})", e.b, e.a, e.b)))?;
        if taken[ca] || taken[cb] {
            return Err(fail(format!("clone reused for ({}, {})", e.a, e.b)));
        }
        take(&mut taken, &mut out, ca, cb);
    }

    let dummy_pool = |side: Side| match side {
        Side::A => g.dummies(CloneKind::DummyA),
        Side::B => g.dummies(CloneKind::DummyB),
    };
    let adjacent_to_resort = |c: usize, v: VertexId| {
        g.resorts_of(v)
            .first()
            .is_some_and(|&l| g.edge(g.orient(c, l).0, g.orient(c, l).1).is_some())
    };
    let next_dummy = |taken: &[bool], side: Side| dummy_pool(side).into_iter().find(|&d| !taken[d]);

    // (iii) clones of vertices deficient in N that cannot reach a
    // last-resort take dummies.
    for v in inst.vertex_ids() {
        if n.partners(v).len() >= inst.quotas(v).lower {
            continue;
        }
        for c in g.clones_of(v) {
            if !taken[c] && !adjacent_to_resort(c, v) {
                let d = next_dummy(&taken, v.side).ok_or_else(|| fail("out of dummies".into()))?;
                take(&mut taken, &mut out, c, d);
            }
        }
    }
    // (iv) leftovers: dummies first, then own last-resorts. Vertices with
    // more leftovers than last-resorts are served first so an earlier
    // vertex cannot use up a dummy another one depends on.
    let leftovers = |taken: &[bool], v: VertexId| -> Vec<usize> {
        g.clones_of(v).into_iter().filter(|&c| !taken[c]).collect()
    };
    for v in inst.vertex_ids() {
        let rest = leftovers(&taken, v);
        let forced = rest.len().saturating_sub(g.resorts_of(v).len());
        for &c in rest.iter().take(forced) {
            let d = next_dummy(&taken, v.side).ok_or_else(|| fail("out of dummies".into()))?;
            take(&mut taken, &mut out, c, d);
        }
    }
    for v in inst.vertex_ids() {
        for c in leftovers(&taken, v) {
            let target = next_dummy(&taken, v.side)
                .or_else(|| g.resorts_of(v).into_iter().find(|&l| !taken[l]))
                .ok_or_else(|| fail(format!("no partner left for {}", g.labels[c])))?;
            take(&mut taken, &mut out, c, target);
        }
    }
    out.pairs.sort_unstable();
    if !out.is_perfect(g) {
        return Err(fail("image is not perfect on clones and dummies".into()));
    }
    Ok(out)
}

/// Builds the graph and dual for a solver output and verifies them.
pub fn certify(
    inst: &Instance,
    m: &LeveledMatching,
) -> Result<(ClonedGraph, DualCertificate, VerificationReport), MatchingError> {
    let g = build_cloned_graph(inst, m)?;
    let cert = dual_assignment(&g)?;
    let report = verify_certificate(&g, &cert);
    Ok((g, cert, report))
}

/// Edge of the instance a true clone edge stands for.
pub fn instance_edge(g: &ClonedGraph, u: usize, v: usize) -> Option<Edge> {
    match (g.nodes[u].id, g.nodes[v].id) {
        (
            CloneId {
                kind: CloneKind::CloneA,
                owner: Some(a),
                ..
            },
            CloneId {
                kind: CloneKind::CloneB,
                owner: Some(b),
                ..
            },
        ) => Some(Edge::new(a.index, b.index)),
        _ => None,
    }
}
