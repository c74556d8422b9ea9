//! Exhaustive ground truth for small instances: every matching, the
//! critical ones, and which of those no critical rival beats.
//!
//! Matchings are handled as bitmasks over the sorted edge list. The
//! margin by which one matching beats another decomposes over vertices,
//! and each vertex only sees the subsets of its own incident edges, so
//! the per-vertex best margins are tabulated once up front.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::OracleError;
use crate::instance::{Edge, Instance, Side, VertexId};
use crate::matching::{deficiency, Matching};
use crate::popularity::{max_delta, vertex_best_margin};

pub const DEFAULT_EDGE_BUDGET: usize = 14;

/// Hard cap on the budget; masks are `u64` and the enumeration is
/// exponential well before that.
pub const MAX_EDGE_BUDGET: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Largest edge count the oracle accepts.
    pub edge_budget: usize,
    /// Worker threads for the popularity checks; `None` uses the global
    /// pool. The result does not depend on it.
    pub threads: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            edge_budget: DEFAULT_EDGE_BUDGET,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub matching_count: usize,
    pub min_deficiency: usize,
    /// Smallest A-side and B-side deficiency over all matchings.
    pub min_def_a: usize,
    pub min_def_b: usize,
    pub critical_count: usize,
    /// Critical matchings in enumeration order.
    pub critical: Vec<Matching>,
    /// Critical matchings no critical rival beats.
    pub popular_critical: Vec<Matching>,
    pub max_popular_size: usize,
    /// Every critical matching attains both per-side minima at once.
    pub side_minima_agree: bool,
}

impl OracleResult {
    pub fn is_popular_critical(&self, m: &Matching) -> bool {
        self.popular_critical.contains(m)
    }

    /// Plain-text summary; with `list`, the critical and popular critical
    /// matchings follow in the matching file format.
    pub fn report(&self, inst: &Instance, list: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "matchings {}", self.matching_count);
        let _ = writeln!(s, "min_deficiency {}", self.min_deficiency);
        let _ = writeln!(s, "min_def_a {}", self.min_def_a);
        let _ = writeln!(s, "min_def_b {}", self.min_def_b);
        let _ = writeln!(s, "critical {}", self.critical_count);
        let _ = writeln!(s, "popular_critical {}", self.popular_critical.len());
        let _ = writeln!(s, "max_popular_size {}", self.max_popular_size);
        let _ = writeln!(
            s,
            "side_minima {}",
            if self.side_minima_agree {
                "holds"
            } else {
                "fails"
            }
        );
        if list {
            for (title, ms) in [
                ("critical", &self.critical),
                ("popular_critical", &self.popular_critical),
            ] {
                for (i, m) in ms.iter().enumerate() {
                    let _ = writeln!(s, "# {title} {}", i + 1);
                    s.push_str(&m.serialize(inst));
                }
            }
        }
        s
    }
}

fn check_budget(inst: &Instance, budget: usize) -> Result<(), OracleError> {
    let edges = inst.edges().len();
    let budget = budget.min(MAX_EDGE_BUDGET);
    if edges > budget {
        return Err(OracleError::BudgetExceeded { edges, budget });
    }
    Ok(())
}

/// Per-vertex view of the edge bitmask.
struct Incidence {
    /// Global edge indices at each vertex, in that vertex's preference
    /// order, so local bit `i` is the partner of rank `i`.
    local: Vec<Vec<usize>>,
    mask: Vec<u64>,
    upper: Vec<usize>,
    lower: Vec<usize>,
    n_a: usize,
}

impl Incidence {
    fn new(inst: &Instance) -> Self {
        let ids: Vec<VertexId> = inst.vertex_ids().collect();
        let local: Vec<Vec<usize>> = ids
            .iter()
            .map(|&v| {
                inst.pref(v)
                    .iter()
                    .filter_map(|&u| {
                        let e = match v.side {
                            Side::A => Edge::new(v.index, u),
                            Side::B => Edge::new(u, v.index),
                        };
                        inst.edge_index(e)
                    })
                    .collect()
            })
            .collect();
        let mask = local
            .iter()
            .map(|es| es.iter().fold(0u64, |m, &i| m | 1 << i))
            .collect();
        Incidence {
            local,
            mask,
            upper: ids.iter().map(|&v| inst.quotas(v).upper).collect(),
            lower: ids.iter().map(|&v| inst.quotas(v).lower).collect(),
            n_a: inst.n_a(),
        }
    }

    fn to_local(&self, v: usize, mask: u64) -> usize {
        self.local[v]
            .iter()
            .enumerate()
            .filter(|(_, &e)| mask >> e & 1 == 1)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// (A-side, B-side) deficiency of a mask.
    fn deficiency(&self, mask: u64) -> (usize, usize) {
        let mut d = (0, 0);
        for v in 0..self.mask.len() {
            let deg = (mask & self.mask[v]).count_ones() as usize;
            let def = self.lower[v].saturating_sub(deg);
            if v < self.n_a {
                d.0 += def;
            } else {
                d.1 += def;
            }
        }
        d
    }
}

/// All upper-quota-respecting edge subsets as masks, in depth-first
/// order (edge excluded before included).
fn enumerate_masks(inst: &Instance, inc: &Incidence) -> Vec<u64> {
    let edges = inst.edges();
    let n_a = inst.n_a();
    let mut load = vec![0usize; inc.upper.len()];
    let mut out = Vec::new();
    fn go(
        i: usize,
        mask: u64,
        edges: &[Edge],
        n_a: usize,
        inc: &Incidence,
        load: &mut [usize],
        out: &mut Vec<u64>,
    ) {
        if i == edges.len() {
            out.push(mask);
            return;
        }
        go(i + 1, mask, edges, n_a, inc, load, out);
        let (u, v) = (edges[i].a, n_a + edges[i].b);
        if load[u] < inc.upper[u] && load[v] < inc.upper[v] {
            load[u] += 1;
            load[v] += 1;
            go(i + 1, mask | 1 << i, edges, n_a, inc, load, out);
            load[u] -= 1;
            load[v] -= 1;
        }
    }
    go(0, 0, edges, n_a, inc, &mut load, &mut out);
    out
}

fn mask_to_matching(inst: &Instance, mask: u64) -> Matching {
    Matching::from_edges_unchecked(
        inst.edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e),
    )
}

/// Every matching of the instance, each exactly once.
pub fn enumerate_matchings(inst: &Instance, budget: usize) -> Result<Vec<Matching>, OracleError> {
    check_budget(inst, budget)?;
    let inc = Incidence::new(inst);
    Ok(enumerate_masks(inst, &inc)
        .into_iter()
        .map(|m| mask_to_matching(inst, m))
        .collect())
}

/// Minimum total deficiency and all matchings attaining it.
pub fn critical_set(inst: &Instance, budget: usize) -> Result<(usize, Vec<Matching>), OracleError> {
    check_budget(inst, budget)?;
    let inc = Incidence::new(inst);
    let masks = enumerate_masks(inst, &inc);
    let defs: Vec<usize> = masks
        .iter()
        .map(|&m| {
            let (a, b) = inc.deficiency(m);
            a + b
        })
        .collect();
    let min = defs.iter().copied().min().unwrap_or(0);
    let critical = masks
        .iter()
        .zip(&defs)
        .filter(|(_, &d)| d == min)
        .map(|(&m, _)| mask_to_matching(inst, m))
        .collect();
    Ok((min, critical))
}

/// True iff no rival beats `m` under any correspondence.
pub fn is_popular_among(inst: &Instance, m: &Matching, rivals: &[Matching]) -> bool {
    rivals.iter().all(|n| max_delta(inst, m, n) <= 0)
}

/// Best margin of one mask over another, summed over vertices.
struct MarginTable {
    inc: Incidence,
    /// Per vertex, indexed by `(m_only << deg) | n_only` over local bits;
    /// empty for vertices above [`TABULATED_DEGREE`].
    table: Vec<Vec<i8>>,
}

/// Vertices up to this degree get a 4^deg lookup table.
const TABULATED_DEGREE: usize = 6;

fn local_margin(d: usize, m_only: usize, n_only: usize) -> i64 {
    let rm: Vec<usize> = (0..d).filter(|i| m_only >> i & 1 == 1).collect();
    let rn: Vec<usize> = (0..d).filter(|i| n_only >> i & 1 == 1).collect();
    vertex_best_margin(&rn, &rm).0
}

impl MarginTable {
    fn new(inst: &Instance) -> Self {
        let inc = Incidence::new(inst);
        let table = inc
            .local
            .iter()
            .map(|es| {
                let d = es.len();
                if d > TABULATED_DEGREE {
                    return Vec::new();
                }
                let mut t = vec![0i8; 1 << (2 * d)];
                for m_only in 0..1usize << d {
                    let mut n_only = 0usize;
                    loop {
                        // Only disjoint pairs occur.
                        t[m_only << d | n_only] = local_margin(d, m_only, n_only) as i8;
                        let rest = !m_only & ((1 << d) - 1);
                        n_only = (n_only.wrapping_sub(rest)) & rest;
                        if n_only == 0 {
                            break;
                        }
                    }
                }
                t
            })
            .collect();
        MarginTable { inc, table }
    }

    /// Largest margin by which `n` beats `m`.
    fn beats_by(&self, m: u64, n: u64) -> i64 {
        let (m_only, n_only) = (m & !n, n & !m);
        let diff = m_only | n_only;
        let mut total = 0i64;
        for v in 0..self.table.len() {
            if diff & self.inc.mask[v] == 0 {
                continue;
            }
            let d = self.inc.local[v].len();
            let lm = self.inc.to_local(v, m_only);
            let ln = self.inc.to_local(v, n_only);
            total += match self.table[v].get(lm << d | ln) {
                Some(&x) => i64::from(x),
                None => local_margin(d, lm, ln),
            };
        }
        total
    }
}

/// Full exhaustive analysis of a small instance.
pub fn oracle_solve(inst: &Instance, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    check_budget(inst, cfg.edge_budget)?;
    let table = MarginTable::new(inst);
    let masks = enumerate_masks(inst, &table.inc);
    let defs: Vec<(usize, usize)> = masks.iter().map(|&m| table.inc.deficiency(m)).collect();
    let min_deficiency = defs.iter().map(|d| d.0 + d.1).min().unwrap_or(0);
    let min_def_a = defs.iter().map(|d| d.0).min().unwrap_or(0);
    let min_def_b = defs.iter().map(|d| d.1).min().unwrap_or(0);
    let critical: Vec<u64> = masks
        .iter()
        .zip(&defs)
        .filter(|(_, d)| d.0 + d.1 == min_deficiency)
        .map(|(&m, _)| m)
        .collect();
    let side_minima_agree = masks
        .iter()
        .zip(&defs)
        .filter(|(_, d)| d.0 + d.1 == min_deficiency)
        .all(|(_, d)| d.0 == min_def_a && d.1 == min_def_b);

    // Larger rivals tend to beat more candidates, so try them first.
    let mut rivals = critical.clone();
    rivals.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    let undefeated = |m: u64| rivals.iter().all(|&n| table.beats_by(m, n) <= 0);
    let flags: Vec<bool> = match cfg.threads {
        Some(1) => critical.iter().map(|&m| undefeated(m)).collect(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map(|pool| pool.install(|| critical.par_iter().map(|&m| undefeated(m)).collect()))
            .unwrap_or_else(|_| critical.iter().map(|&m| undefeated(m)).collect()),
        None => critical.par_iter().map(|&m| undefeated(m)).collect(),
    };
    let popular: Vec<u64> = critical
        .iter()
        .zip(&flags)
        .filter(|(_, &f)| f)
        .map(|(&m, _)| m)
        .collect();
    let max_popular_size = popular
        .iter()
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0);
    Ok(OracleResult {
        matching_count: masks.len(),
        min_deficiency,
        min_def_a,
        min_def_b,
        critical_count: critical.len(),
        critical: critical
            .iter()
            .map(|&m| mask_to_matching(inst, m))
            .collect(),
        popular_critical: popular.iter().map(|&m| mask_to_matching(inst, m)).collect(),
        max_popular_size,
        side_minima_agree,
    })
}

/// Per-side deficiencies of a matching, for cross-checks.
pub fn side_deficiencies(inst: &Instance, m: &Matching) -> (usize, usize) {
    let r = deficiency(inst, m).expect("matching of this instance");
    (r.def_a, r.def_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{FIG1, FIG4, VOTING};
    use std::collections::BTreeSet;

    fn fig1() -> Instance {
        Instance::parse(FIG1).unwrap()
    }

    /// Second, independent enumeration: every subset of E by counting,
    /// filtered by validity.
    fn brute_subsets(inst: &Instance) -> BTreeSet<Matching> {
        let n = inst.edges().len();
        (0u64..1 << n)
            .map(|mask| mask_to_matching(inst, mask))
            .filter(|m| m.validate(inst).is_ok())
            .collect()
    }

    #[test]
    fn single_edge_has_two_matchings() {
        let inst = Instance::parse("A a 0 1\nB b 0 1\nPREF a b\nPREF b a\n").unwrap();
        assert_eq!(enumerate_matchings(&inst, 14).unwrap().len(), 2);
    }

    #[test]
    fn fig1_enumeration_matches_recount() {
        let inst = fig1();
        let ms = enumerate_matchings(&inst, 14).unwrap();
        let set: BTreeSet<Matching> = ms.iter().cloned().collect();
        assert_eq!(set.len(), ms.len());
        assert_eq!(set, brute_subsets(&inst));
    }

    #[test]
    fn random_enumeration_matches_recount() {
        use crate::generate::{generate_random_instance, GenParams};
        for seed in 0..60 {
            let p = GenParams {
                n_a: 3,
                n_b: 3,
                max_upper: 2,
                edge_density: 0.8,
                seed,
                ..GenParams::default()
            };
            let inst = generate_random_instance(&p).unwrap();
            let ms = enumerate_matchings(&inst, 14).unwrap();
            let set: BTreeSet<Matching> = ms.iter().cloned().collect();
            assert_eq!(set.len(), ms.len());
            assert_eq!(set, brute_subsets(&inst), "seed {seed}");
        }
    }

    #[test]
    fn quota_filter_excludes_overfull_vertex() {
        let inst =
            Instance::parse("A a 0 1\nB b 0 1\nB c 0 1\nPREF a b c\nPREF b a\nPREF c a\n").unwrap();
        let ms = enumerate_matchings(&inst, 14).unwrap();
        assert_eq!(ms.len(), 3);
        assert!(ms.iter().all(|m| m.len() <= 1));
    }

    #[test]
    fn budget_enforced() {
        let inst = fig1();
        assert_eq!(
            enumerate_matchings(&inst, 4),
            Err(OracleError::BudgetExceeded {
                edges: 5,
                budget: 4
            })
        );
        assert!(oracle_solve(
            &inst,
            &OracleConfig {
                edge_budget: 4,
                threads: None
            }
        )
        .is_err());
    }

    #[test]
    fn fig1_critical_set() {
        let inst = fig1();
        let (min, set) = critical_set(&inst, 14).unwrap();
        assert_eq!(min, 1);
        let m1 = Matching::from_names(&inst, &[("a1", "b1"), ("a1", "b2"), ("a3", "b2")]).unwrap();
        let m2 = Matching::from_names(&inst, &[("a1", "b1"), ("a2", "b2"), ("a3", "b2")]).unwrap();
        let m3 = Matching::from_names(&inst, &[("a1", "b2"), ("a2", "b1"), ("a2", "b2")]).unwrap();
        assert!(set.contains(&m2));
        assert!(set.contains(&m3));
        assert!(!set.contains(&m1));
    }

    #[test]
    fn zero_lower_quotas_make_everything_critical() {
        let inst = Instance::parse(VOTING).unwrap();
        let (min, set) = critical_set(&inst, 14).unwrap();
        assert_eq!(min, 0);
        assert_eq!(set.len(), enumerate_matchings(&inst, 14).unwrap().len());
    }

    #[test]
    fn voting_popularity() {
        let inst = Instance::parse(VOTING).unwrap();
        let all = enumerate_matchings(&inst, 14).unwrap();
        let top = Matching::from_names(&inst, &[("a1", "b"), ("a2", "b"), ("a3", "b")]).unwrap();
        assert!(is_popular_among(&inst, &top, &all));
        let m = Matching::from_names(&inst, &[("a2", "b"), ("a3", "b"), ("a5", "b")]).unwrap();
        let n = Matching::from_names(&inst, &[("a1", "b"), ("a4", "b"), ("a6", "b")]).unwrap();
        assert!(!is_popular_among(&inst, &m, std::slice::from_ref(&n)));
        assert_eq!(max_delta(&inst, &m, &n), 1);
        assert!(is_popular_among(&inst, &m, std::slice::from_ref(&m)));
    }

    #[test]
    fn margin_table_agrees_with_max_delta() {
        use crate::generate::{generate_random_instance, GenParams};
        for seed in 0..20 {
            let p = GenParams {
                n_a: 3,
                n_b: 3,
                max_upper: 3,
                edge_density: 0.7,
                seed,
                ..GenParams::default()
            };
            let inst = generate_random_instance(&p).unwrap();
            let t = MarginTable::new(&inst);
            let masks = enumerate_masks(&inst, &t.inc);
            for &m in masks.iter().step_by(7) {
                for &n in masks.iter().step_by(5) {
                    let want = max_delta(
                        &inst,
                        &mask_to_matching(&inst, m),
                        &mask_to_matching(&inst, n),
                    );
                    assert_eq!(t.beats_by(m, n), want, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn fig1_oracle() {
        let inst = fig1();
        let r = oracle_solve(&inst, &OracleConfig::default()).unwrap();
        assert_eq!(r.min_deficiency, 1);
        assert!(r.side_minima_agree);
        assert!(!r.popular_critical.is_empty());
        let (m, _) = crate::solver::solve(&inst);
        assert!(r.is_popular_critical(&m.base));
        assert_eq!(m.base.len(), r.max_popular_size);
        let seq = oracle_solve(
            &inst,
            &OracleConfig {
                edge_budget: 14,
                threads: Some(1),
            },
        )
        .unwrap();
        assert_eq!(seq, r);
    }

    #[test]
    fn fig4_oracle() {
        let inst = Instance::parse(FIG4).unwrap();
        let r = oracle_solve(&inst, &OracleConfig::default()).unwrap();
        assert_eq!(r.min_deficiency, 0);
        let (m, _) = crate::solver::solve(&inst);
        assert!(r.is_popular_critical(&m.base));
        assert_eq!(r.max_popular_size, 6);
    }

    #[test]
    fn forced_assignment_is_unique_popular_critical() {
        let inst = Instance::parse(
            "A a1 1 1\nA a2 1 1\nB b1 1 1\nB b2 1 1\nPREF a1 b1\nPREF a2 b2\nPREF b1 a1\nPREF b2 a2\n",
        )
        .unwrap();
        let r = oracle_solve(&inst, &OracleConfig::default()).unwrap();
        let want = Matching::from_names(&inst, &[("a1", "b1"), ("a2", "b2")]).unwrap();
        assert_eq!(r.popular_critical, vec![want]);
        assert_eq!(r.critical_count, 1);
    }

    #[test]
    fn report_lists_matchings() {
        let inst = fig1();
        let r = oracle_solve(&inst, &OracleConfig::default()).unwrap();
        let text = r.report(&inst, true);
        assert!(text.starts_with("matchings "));
        assert!(text.contains("min_deficiency 1\n"));
        assert!(text.contains("# popular_critical 1\n"));
    }
}
