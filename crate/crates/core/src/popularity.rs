//! Votes, correspondence functions and the popularity margin between two
//! matchings.
//!
//! A vertex compares the partners it has only in one matching with the
//! partners it has only in the other, position by position. Unfilled
//! positions are the bottom symbol, written `None` here, which every
//! vertex ranks below any real partner.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::assignment::best_assignment;
use crate::error::MatchingError;
use crate::instance::{Instance, VertexId};
use crate::matching::Matching;

/// Rank used for the bottom symbol.
const BOTTOM_RANK: usize = usize::MAX;

/// +1 if rank `rx` beats rank `ry`, -1 if it loses, 0 on equality.
#[inline]
pub(crate) fn vote_by_rank(rx: usize, ry: usize) -> i64 {
    match rx.cmp(&ry) {
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Greater => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

fn rank_of(inst: &Instance, v: VertexId, x: Option<usize>) -> Result<usize, MatchingError> {
    match x {
        None => Ok(BOTTOM_RANK),
        Some(u) => inst.rank(v, u).ok_or_else(|| MatchingError::NotAcceptable {
            vertex: inst.name(v).to_string(),
            partner: format!("#{u}"),
        }),
    }
}

/// Vote of `v` for `x` over `y`; `None` is the bottom symbol.
pub fn vote(
    inst: &Instance,
    v: VertexId,
    x: Option<usize>,
    y: Option<usize>,
) -> Result<i64, MatchingError> {
    Ok(vote_by_rank(rank_of(inst, v, x)?, rank_of(inst, v, y)?))
}

/// Per-vertex pairing between the partners a vertex has only in a first
/// matching and those it has only in a second one. Each pair is
/// `(from_first, from_second)`; the shorter side is padded with `None`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Correspondence {
    pairs: BTreeMap<VertexId, Pairs>,
}

type Pair = (Option<usize>, Option<usize>);
type Pairs = Vec<Pair>;

fn differences(first: &Matching, second: &Matching, v: VertexId) -> (Vec<usize>, Vec<usize>) {
    let f: BTreeSet<usize> = first.partners(v).into_iter().collect();
    let s: BTreeSet<usize> = second.partners(v).into_iter().collect();
    (
        f.difference(&s).copied().collect(),
        s.difference(&f).copied().collect(),
    )
}

fn pad(xs: &[usize], k: usize) -> Vec<Option<usize>> {
    let mut out: Vec<Option<usize>> = xs.iter().map(|&x| Some(x)).collect();
    out.resize(k, None);
    out
}

impl Correspondence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: VertexId, pairs: Pairs) {
        if pairs.is_empty() {
            self.pairs.remove(&v);
        } else {
            self.pairs.insert(v, pairs);
        }
    }

    pub fn get(&self, v: VertexId) -> &[(Option<usize>, Option<usize>)] {
        self.pairs.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &[Pair])> {
        self.pairs.iter().map(|(v, p)| (*v, p.as_slice()))
    }

    /// Same bijection read in the other direction.
    pub fn swapped(&self) -> Self {
        Correspondence {
            pairs: self
                .pairs
                .iter()
                .map(|(v, p)| (*v, p.iter().map(|&(x, y)| (y, x)).collect()))
                .collect(),
        }
    }

    /// Partner the vertex `v` compares with `x` (taken from the first
    /// matching); `None` when `x` is paired with the bottom symbol.
    pub fn image_of_first(&self, v: VertexId, x: usize) -> Option<Option<usize>> {
        self.get(v)
            .iter()
            .find(|(f, _)| *f == Some(x))
            .map(|&(_, y)| y)
    }

    /// Pairs the sorted differences in order, padding with `None`.
    pub fn canonical(inst: &Instance, first: &Matching, second: &Matching) -> Self {
        let mut corr = Correspondence::new();
        for v in inst.vertex_ids() {
            let (f, s) = differences(first, second, v);
            let k = f.len().max(s.len());
            corr.insert(v, pad(&f, k).into_iter().zip(pad(&s, k)).collect());
        }
        corr
    }

    /// A uniformly random bijection per vertex.
    pub fn random<R: Rng + ?Sized>(
        inst: &Instance,
        first: &Matching,
        second: &Matching,
        rng: &mut R,
    ) -> Self {
        let mut corr = Correspondence::new();
        for v in inst.vertex_ids() {
            let (f, s) = differences(first, second, v);
            let k = f.len().max(s.len());
            let mut right = pad(&s, k);
            right.shuffle(rng);
            corr.insert(v, pad(&f, k).into_iter().zip(right).collect());
        }
        corr
    }

    /// Every correspondence between `first` and `second`, or `None` if
    /// there are more than `limit` of them.
    pub fn enumerate(
        inst: &Instance,
        first: &Matching,
        second: &Matching,
        limit: usize,
    ) -> Option<Vec<Self>> {
        use itertools::Itertools;
        let mut per_vertex: Vec<(VertexId, Vec<Pairs>)> = Vec::new();
        let mut count = 1usize;
        for v in inst.vertex_ids() {
            let (f, s) = differences(first, second, v);
            let k = f.len().max(s.len());
            if k == 0 {
                continue;
            }
            let left = pad(&f, k);
            let right = pad(&s, k);
            let mut options: Vec<Pairs> = right
                .iter()
                .copied()
                .permutations(k)
                .map(|perm| left.iter().copied().zip(perm).collect())
                .collect();
            // Permuting bottom symbols among themselves gives duplicates.
            options.sort();
            options.dedup();
            count = count.checked_mul(options.len())?;
            if count > limit {
                return None;
            }
            per_vertex.push((v, options));
        }
        let mut out = vec![Correspondence::new()];
        for (v, options) in per_vertex {
            let mut next = Vec::with_capacity(out.len() * options.len());
            for c in &out {
                for p in &options {
                    let mut c2 = c.clone();
                    c2.insert(v, p.clone());
                    next.push(c2);
                }
            }
            out = next;
        }
        Some(out)
    }

    /// Checks that for every vertex the real entries on each side are
    /// exactly the partners it has only in that matching.
    pub fn check(
        &self,
        inst: &Instance,
        first: &Matching,
        second: &Matching,
    ) -> Result<(), MatchingError> {
        let bad = |v: VertexId, reason: String| MatchingError::BadCorrespondence {
            vertex: inst.name(v).to_string(),
            reason,
        };
        for (v, pairs) in self.iter() {
            if v.index >= inst.side_len(v.side) {
                return Err(MatchingError::BadCorrespondence {
                    vertex: format!("{v:?}"),
                    reason: "unknown vertex".into(),
                });
            }
            let other_len = inst.side_len(v.side.other());
            let out_of_range = |x: Option<usize>| x.is_some_and(|x| x >= other_len);
            if pairs
                .iter()
                .any(|&(x, y)| out_of_range(x) || out_of_range(y))
            {
                return Err(bad(v, "entry out of range".into()));
            }
        }
        for v in inst.vertex_ids() {
            let (f, s) = differences(first, second, v);
            let pairs = self.get(v);
            let mut xs: Vec<usize> = pairs.iter().filter_map(|p| p.0).collect();
            let mut ys: Vec<usize> = pairs.iter().filter_map(|p| p.1).collect();
            xs.sort_unstable();
            ys.sort_unstable();
            if xs != f {
                return Err(bad(v, format!("first side {xs:?} but difference is {f:?}")));
            }
            if ys != s {
                return Err(bad(
                    v,
                    format!("second side {ys:?} but difference is {s:?}"),
                ));
            }
            let common = first.partners(v).len() - f.len();
            if pairs.len() > inst.quotas(v).upper.saturating_sub(common) {
                return Err(bad(v, "more positions than the upper quota allows".into()));
            }
        }
        Ok(())
    }
}

/// Votes for `m` over `n` under `corr`, where `corr` pairs `m`-partners
/// (first) with `n`-partners (second). Positive means `m` wins.
pub fn delta(
    inst: &Instance,
    m: &Matching,
    n: &Matching,
    corr: &Correspondence,
) -> Result<i64, MatchingError> {
    corr.check(inst, m, n)?;
    let mut total = 0;
    for (v, pairs) in corr.iter() {
        for &(x, y) in pairs {
            total += vote(inst, v, x, y)?;
        }
    }
    Ok(total)
}

/// Best margin of `n` over `m` at a single vertex, over all bijections.
/// `n_only` and `m_only` are preference ranks of the differing partners.
pub(crate) fn vertex_best_margin(n_only: &[usize], m_only: &[usize]) -> (i64, Vec<usize>) {
    let k = n_only.len().max(m_only.len());
    if k == 0 {
        return (0, Vec::new());
    }
    let at = |xs: &[usize], i: usize| xs.get(i).copied().unwrap_or(BOTTOM_RANK);
    let w: Vec<Vec<i64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| vote_by_rank(at(n_only, i), at(m_only, j)))
                .collect()
        })
        .collect();
    best_assignment(&w)
}

/// The largest margin by which `n` beats `m` over all correspondence
/// functions, together with a correspondence (pairing `n`-partners with
/// `m`-partners) attaining it. `m` is undefeated by `n` iff the margin
/// is at most zero.
pub fn worst_case_correspondence(
    inst: &Instance,
    m: &Matching,
    n: &Matching,
) -> (i64, Correspondence) {
    let mut total = 0;
    let mut corr = Correspondence::new();
    for v in inst.vertex_ids() {
        let (n_only, m_only) = differences(n, m, v);
        let k = n_only.len().max(m_only.len());
        if k == 0 {
            continue;
        }
        let rank = |u: usize| inst.rank(v, u).unwrap_or(BOTTOM_RANK);
        let rn: Vec<usize> = n_only.iter().map(|&u| rank(u)).collect();
        let rm: Vec<usize> = m_only.iter().map(|&u| rank(u)).collect();
        let (best, assign) = vertex_best_margin(&rn, &rm);
        total += best;
        let left = pad(&n_only, k);
        let right = pad(&m_only, k);
        let pairs = assign
            .iter()
            .enumerate()
            .map(|(i, &j)| (left[i], right[j]))
            .filter(|p| *p != (None, None))
            .collect();
        corr.insert(v, pairs);
    }
    (total, corr)
}

pub fn max_delta(inst: &Instance, m: &Matching, n: &Matching) -> i64 {
    worst_case_correspondence(inst, m, n).0
}
