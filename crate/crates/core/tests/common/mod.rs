#![allow(dead_code)]

use fedlap_core::data::{generate_synthetic, split, SyntheticSpec};
use fedlap_core::{ClientGraph, FederatedDataset, MlrModel, QuadraticModel, StackedParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph with weights uniform in (0, 1].
pub fn random_weighted_graph(n: usize, p: f64, rng: &mut impl Rng) -> ClientGraph {
    let mut edges = Vec::new();
    for k in 0..n {
        for l in k + 1..n {
            if rng.random_bool(p) {
                edges.push((k, l, 1.0 - rng.random::<f64>()));
            }
        }
    }
    ClientGraph::build(n, &edges).unwrap()
}

pub fn random_params(n: usize, d: usize, rng: &mut impl Rng) -> StackedParams {
    StackedParams::new((0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect()).unwrap()
}

pub fn random_quadratics(n: usize, d: usize, curvature: f64, rng: &mut impl Rng) -> Vec<QuadraticModel> {
    (0..n)
        .map(|_| QuadraticModel::new((0..d).map(|_| rng.random_range(-5.0..5.0)).collect(), curvature))
        .collect()
}

/// Split synthetic classification data plus per-client MLR models.
pub fn mlr_instance(n_clients: usize, seed: u64) -> (FederatedDataset, Vec<MlrModel>) {
    let mut spec = SyntheticSpec::new(n_clients, 5, 4, 2);
    spec.samples_mean = 40.0;
    spec.samples_std = 10.0;
    spec.seed = seed;
    let ds = split(&generate_synthetic(&spec).unwrap(), 0.75, seed).unwrap();
    let models = (0..n_clients).map(|_| MlrModel::new(5, 4, 1e-3)).collect();
    (ds, models)
}
