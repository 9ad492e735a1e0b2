//! Graphs under which FedU reduces to conventional and personalized FL.

use crate::data::ClientDataset;
use crate::error::Result;
use crate::graph::ClientGraph;
use crate::models::{Model, QuadraticModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FedAvgGraph {
    /// Complete unit-weight graph; large η drives every model to consensus.
    Consensus,
    /// Virtual server vertex 0 with `a_k0 = 1` and no client-client edges.
    Star,
}

/// Graph for `n_clients` real clients. `Star` has `n_clients + 1` vertices.
pub fn fedavg_mode(kind: FedAvgGraph, n_clients: usize) -> Result<ClientGraph> {
    match kind {
        FedAvgGraph::Consensus => ClientGraph::complete(n_clients, 1.0),
        FedAvgGraph::Star => ClientGraph::star(n_clients),
    }
}

/// Prepends the zero-loss server vertex (`F_0 ≡ 0`) expected by the star graph.
pub fn with_virtual_server(models: Vec<Model>, data: Vec<ClientDataset>, dim: usize) -> (Vec<Model>, Vec<ClientDataset>) {
    let mut all_models = Vec::with_capacity(models.len() + 1);
    all_models.push(Model::Quadratic(QuadraticModel::zero_loss(dim)));
    all_models.extend(models);
    let mut all_data = Vec::with_capacity(data.len() + 1);
    all_data.push(ClientDataset::data_free());
    all_data.extend(data);
    (all_models, all_data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LossModel;

    #[test]
    fn star_of_three() {
        let g = fedavg_mode(FedAvgGraph::Star, 3).unwrap();
        assert_eq!(g.n_clients(), 4);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (0, 3)]);
        assert!((1..=3).all(|k| g.weight(0, k) == 1.0 && g.weight(k, 0) == 1.0));
        assert!((1..=3).all(|k| (1..=3).all(|l| g.weight(k, l) == 0.0)));
    }

    #[test]
    fn complete_two() {
        let g = fedavg_mode(FedAvgGraph::Consensus, 2).unwrap();
        assert_eq!(g, ClientGraph::build(2, &[(0, 1, 1.0)]).unwrap());
    }

    #[test]
    fn server_vertex_has_zero_loss() {
        let (models, data) = with_virtual_server(vec![Model::Quadratic(QuadraticModel::unit(vec![1.0, 2.0]))], vec![ClientDataset::data_free()], 2);
        assert_eq!(models.len(), 2);
        assert_eq!(data.len(), 2);
        let Model::Quadratic(server) = &models[0] else { panic!() };
        assert_eq!(server.curvature, 0.0);
        assert_eq!(models[0].loss(&[7.0, -3.0], &data[0].train).unwrap(), 0.0);
    }
}
