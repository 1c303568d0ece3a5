use imm_core::oracle::exact_max_coverage;
use imm_core::rr::coverage_fraction;
use imm_core::select::{node_selection, node_selection_naive};
use imm_core::{NodeId, RRSet};
use proptest::prelude::*;

fn arb_instance(max_n: usize, max_theta: usize) -> impl Strategy<Value = (usize, Vec<RRSet>)> {
    (2..=max_n).prop_flat_map(move |n| {
        let set = (0..n as NodeId, prop::collection::btree_set(0..n as NodeId, 0..=n)).prop_map(|(root, mut rest)| {
            rest.insert(root);
            RRSet { root, members: rest.into_iter().collect() }
        });
        (Just(n), prop::collection::vec(set, 1..=max_theta))
    })
}

const GREEDY_RATIO: f64 = 1.0 - 1.0 / std::f64::consts::E;

#[test]
fn six_node_example_against_exhaustive() {
    // 12 sets over 6 nodes, fixed by hand
    let raw: [&[NodeId]; 12] = [
        &[0, 1],
        &[1],
        &[2, 3],
        &[3, 4, 5],
        &[0, 5],
        &[4],
        &[1, 2],
        &[5],
        &[0, 3],
        &[2],
        &[1, 4],
        &[3],
    ];
    let sets: Vec<RRSet> = raw.iter().map(|m| RRSet { root: m[0], members: m.to_vec() }).collect();
    let greedy = node_selection(&sets, 6, 2).unwrap();
    let (best, _) = exact_max_coverage(&sets, 6, 2).unwrap();
    assert!(greedy.coverage() >= GREEDY_RATIO * best);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn greedy_ratio_and_lazy_equivalence((n, sets) in arb_instance(12, 30), k in 1usize..=3) {
        let lazy = node_selection(&sets, n, k).unwrap();
        let naive = node_selection_naive(&sets, n, k).unwrap();
        prop_assert_eq!(&lazy, &naive);

        let (best, _) = exact_max_coverage(&sets, n, k).unwrap();
        prop_assert!(lazy.coverage() >= GREEDY_RATIO * best);
        prop_assert!(lazy.coverage() <= best);

        // SeedResult invariants
        prop_assert_eq!(lazy.seeds.len(), k.min(n));
        let mut sorted = lazy.sorted_seeds();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), lazy.seeds.len());
        prop_assert!(lazy.marginal_counts.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(lazy.coverage(), coverage_fraction(&sets, &lazy.seeds));
        let gain_sum: f64 = lazy.marginal_gains().iter().sum();
        prop_assert!((gain_sum - lazy.coverage()).abs() < 1e-12);
    }

    #[test]
    fn deterministic((n, sets) in arb_instance(20, 60), k in 1usize..=5) {
        prop_assert_eq!(node_selection(&sets, n, k).unwrap(), node_selection(&sets, n, k).unwrap());
    }
}
