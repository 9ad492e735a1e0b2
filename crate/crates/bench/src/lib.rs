//! Shared fixtures for the criterion benches.

use fedlap_core::data::{generate_synthetic, split, SyntheticSpec};
use fedlap_core::{ClientGraph, FederatedDataset, MlrModel, StackedParams};

/// Split synthetic data in the shape of the cut-off experiments.
pub fn dataset(n_clients: usize, n_features: usize, n_classes: usize) -> FederatedDataset {
    let mut spec = SyntheticSpec::new(n_clients, n_features, n_classes, 3);
    spec.seed = 1;
    split(&generate_synthetic(&spec).expect("valid spec"), 0.75, 1).expect("valid split")
}

pub fn mlr_models(ds: &FederatedDataset) -> Vec<MlrModel> {
    vec![MlrModel::new(ds.n_features, ds.n_classes, 1e-3); ds.n_clients()]
}

/// Deterministic non-trivial parameters.
pub fn params(n: usize, dim: usize) -> StackedParams {
    StackedParams::new(
        (0..n)
            .map(|k| (0..dim).map(|j| ((k * 31 + j * 17) % 13) as f64 / 13.0 - 0.5).collect())
            .collect(),
    )
    .expect("uniform blocks")
}

pub fn ring(n: usize) -> ClientGraph {
    ClientGraph::ring(n, 1.0).expect("valid ring")
}
