//! Maximum-weight perfect assignment on small square integer matrices.

use itertools::Itertools;

/// Hungarian method with row/column potentials, O(n^3).
/// Returns the optimum and `assign[row] = col`.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = weights.len();
    if n == 0 {
        return (0, Vec::new());
    }
    debug_assert!(weights.iter().all(|r| r.len() == n));
    // Minimise cost = -weight; 1-based indexing with a virtual column 0.
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    let total = assign.iter().enumerate().map(|(i, &j)| weights[i][j]).sum();
    (total, assign)
}

/// Exhaustive search over all permutations; first optimum in
/// lexicographic permutation order wins.
pub fn brute_force_assignment(weights: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = weights.len();
    if n == 0 {
        return (0, Vec::new());
    }
    let mut best: Option<(i64, Vec<usize>)> = None;
    for perm in (0..n).permutations(n) {
        let total: i64 = perm.iter().enumerate().map(|(i, &j)| weights[i][j]).sum();
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, perm));
        }
    }
    best.expect("n > 0 has at least one permutation")
}

/// Sides up to this size are solved by enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 5;

pub fn best_assignment(weights: &[Vec<i64>]) -> (i64, Vec<usize>) {
    if weights.len() <= EXHAUSTIVE_LIMIT {
        brute_force_assignment(weights)
    } else {
        max_weight_assignment(weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_known_cases() {
        assert_eq!(max_weight_assignment(&[]).0, 0);
        assert_eq!(max_weight_assignment(&[vec![-3]]), (-3, vec![0]));
        let w = vec![vec![1, 2], vec![3, 1]];
        assert_eq!(max_weight_assignment(&w), (5, vec![1, 0]));
        assert_eq!(brute_force_assignment(&w), (5, vec![1, 0]));
    }

    proptest! {
        #[test]
        fn hungarian_matches_enumeration(n in 1usize..=6, seed in proptest::collection::vec(-2i64..=2, 36)) {
            let w: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| seed[i * 6 + j]).collect()).collect();
            let (h, assign) = max_weight_assignment(&w);
            let (b, _) = brute_force_assignment(&w);
            prop_assert_eq!(h, b);
            let mut cols = assign.clone();
            cols.sort_unstable();
            prop_assert_eq!(cols, (0..n).collect::<Vec<_>>());
        }
    }
}
