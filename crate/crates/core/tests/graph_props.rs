mod common;

use fedlap_core::{ClientGraph, StackedParams, WeightScenario};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = (ClientGraph, u64)> {
    (1..=max_n, 0.0..=1.0f64, any::<u64>()).prop_map(|(n, p, seed)| {
        let mut rng = common::rng(seed);
        (common::random_weighted_graph(n, p, &mut rng), seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairwise_form_equals_block_form((g, seed) in graph_strategy(12), d in 1..5usize) {
        let mut rng = common::rng(seed ^ 0x5eed);
        let w = common::random_params(g.n_clients(), d, &mut rng);
        let pairwise = g.laplacian_quadratic(&w).unwrap();
        let lw = g.laplacian_apply(&w).unwrap();
        let block: f64 = (0..g.n_clients())
            .map(|k| w.block(k).iter().zip(lw.block(k)).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        prop_assert!((pairwise - block).abs() <= 1e-10 * (1.0 + pairwise.abs()));
        prop_assert!(pairwise >= 0.0);
    }

    #[test]
    fn rho_matches_dense_eigensolver((g, _) in graph_strategy(50)) {
        let n = g.n_clients();
        let lap = DMatrix::from_fn(n, n, |i, j| g.laplacian()[i][j]);
        let reference = lap.symmetric_eigen().eigenvalues.iter().copied().fold(0.0f64, f64::max);
        prop_assert!((g.rho() - reference).abs() <= 1e-10 * (1.0 + reference));
    }

    #[test]
    fn laplacian_rows_sum_to_zero((g, _) in graph_strategy(20)) {
        for row in g.laplacian() {
            prop_assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn reweighting_stays_symmetric_and_nonnegative((g, seed) in graph_strategy(15), c in 0.0..3.0f64) {
        let n = g.n_clients();
        let mut rng = common::rng(seed);
        let labels: Vec<Vec<usize>> = (0..n).map(|k| vec![k % 4, (k + 1) % 4]).collect();
        for scenario in [
            WeightScenario::Random,
            WeightScenario::Equal(c),
            WeightScenario::weighted((0..n / 2).collect()),
            WeightScenario::Similar(labels.clone()),
        ] {
            let h = g.assign_weights(&scenario, &mut rng).unwrap();
            for k in 0..n {
                prop_assert_eq!(h.weight(k, k), 0.0);
                for l in 0..n {
                    prop_assert_eq!(h.weight(k, l), h.weight(l, k));
                    prop_assert!(h.weight(k, l) >= 0.0);
                    if g.weight(k, l) == 0.0 {
                        prop_assert_eq!(h.weight(k, l), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_energy_means_consensus_when_connected(n in 2..12usize, seed in any::<u64>(), gap in 1e-3..1.0f64) {
        let mut rng = common::rng(seed);
        let mut g = common::random_weighted_graph(n, 0.5, &mut rng);
        if !g.is_connected() {
            g = ClientGraph::ring(n, 0.7).unwrap();
        }
        let shared: Vec<f64> = vec![1.5, -2.0];
        let consensus = StackedParams::new(vec![shared.clone(); n]).unwrap();
        prop_assert_eq!(g.laplacian_quadratic(&consensus).unwrap(), 0.0);
        let mut perturbed = consensus.clone();
        perturbed.block_mut(seed as usize % n)[0] += gap;
        prop_assert!(g.laplacian_quadratic(&perturbed).unwrap() > 0.0);
    }
}
