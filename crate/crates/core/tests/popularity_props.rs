use popcrit::generate::{generate_random_instance, GenParams};
use popcrit::oracle::{enumerate_matchings, oracle_solve, side_deficiencies, OracleConfig};
use popcrit::popularity::{delta, max_delta, Correspondence};
use popcrit::Instance;
use proptest::prelude::*;

fn small(seed: u64) -> Instance {
    generate_random_instance(&GenParams {
        n_a: 1 + (seed % 3) as usize,
        n_b: 1 + ((seed / 3) % 3) as usize,
        max_upper: 2,
        lq_fraction: 0.5,
        edge_density: 0.6,
        seed,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_is_antisymmetric(seed in 0u64..10_000, i in 0usize..64, j in 0usize..64) {
        let inst = small(seed);
        let all = enumerate_matchings(&inst, 14).unwrap();
        let (m, n) = (&all[i % all.len()], &all[j % all.len()]);
        if let Some(corrs) = Correspondence::enumerate(&inst, m, n, 500) {
            for c in corrs {
                prop_assert_eq!(delta(&inst, m, n, &c).unwrap(), -delta(&inst, n, m, &c.swapped()).unwrap());
            }
        }
    }

    #[test]
    fn max_delta_is_the_best_correspondence(seed in 0u64..10_000, i in 0usize..64, j in 0usize..64) {
        let inst = small(seed);
        let all = enumerate_matchings(&inst, 14).unwrap();
        let (m, n) = (&all[i % all.len()], &all[j % all.len()]);
        if let Some(corrs) = Correspondence::enumerate(&inst, n, m, 2_000) {
            let best = corrs.iter().map(|c| delta(&inst, n, m, c).unwrap()).max().unwrap();
            prop_assert_eq!(max_delta(&inst, m, n), best);
        }
    }

    #[test]
    fn critical_matchings_minimise_both_sides(seed in 0u64..10_000) {
        let inst = small(seed);
        let r = oracle_solve(&inst, &OracleConfig::default()).unwrap();
        prop_assert!(r.side_minima_agree);
        for m in &r.critical {
            prop_assert_eq!(side_deficiencies(&inst, m), (r.min_def_a, r.min_def_b));
        }
    }
}
