//! Weighted client-relationship graph and its Laplacian.
//!
//! The Kronecker lift `L ⊗ I_d` is never materialised; every operator here
//! acts per client block.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, symmetric_eigenvalues, Matrix};
use crate::params::StackedParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ClientGraph {
    n_clients: usize,
    /// Structural edges `(k, l)` with `k < l`, in insertion order.
    edges: Vec<(usize, usize)>,
    adjacency: Matrix,
    degrees: Vec<f64>,
    laplacian: Matrix,
    rho: f64,
    /// `neighbors[k]` lists `(l, a_kl)` with `a_kl > 0`, ascending in `l`.
    neighbors: Vec<Vec<(usize, f64)>>,
    connected: bool,
}

/// How to reassign weights on the existing edge set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightScenario {
    /// `|x|` clipped to 1 with `x ~ N(0, 1)`.
    Random,
    Equal(f64),
    Weighted {
        small_set: Vec<usize>,
        #[serde(default)]
        c_small: f64,
        #[serde(default = "half")]
        c_mixed: f64,
        #[serde(default = "one")]
        c_full: f64,
    },
    /// Weight from the number of shared labels: 0, 1, 2+ map to 0, 0.5, 1.
    Similar(Vec<Vec<usize>>),
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

impl WeightScenario {
    /// `Weighted` with the 0 / 0.5 / 1 defaults.
    pub fn weighted(small_set: Vec<usize>) -> Self {
        WeightScenario::Weighted {
            small_set,
            c_small: 0.0,
            c_mixed: 0.5,
            c_full: 1.0,
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl ClientGraph {
    /// Builds the graph from an undirected edge list; each edge is symmetrized.
    pub fn build(n_clients: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut structural = Vec::with_capacity(edges.len());
        let mut adjacency = vec![vec![0.0; n_clients]; n_clients];
        for &(k, l, w) in edges {
            for index in [k, l] {
                if index >= n_clients {
                    return Err(Error::IndexOutOfRange {
                        index,
                        n: n_clients,
                    });
                }
            }
            if k == l {
                return Err(Error::SelfLoop(k));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::NegativeWeight { k, l, weight: w });
            }
            let key = (k.min(l), k.max(l));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge(k, l));
            }
            structural.push(key);
            adjacency[k][l] = w;
            adjacency[l][k] = w;
        }
        Ok(Self::from_parts(n_clients, structural, adjacency))
    }

    fn from_parts(n_clients: usize, edges: Vec<(usize, usize)>, adjacency: Matrix) -> Self {
        let degrees: Vec<f64> = adjacency.iter().map(|row| row.iter().sum()).collect();
        let mut laplacian = adjacency.clone();
        for (k, row) in laplacian.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate() {
                *v = if k == l { degrees[k] } else { -*v };
            }
        }
        let rho = symmetric_eigenvalues(&laplacian)
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0);
        let neighbors: Vec<Vec<(usize, f64)>> = adjacency
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(l, &w)| (l, w))
                    .collect()
            })
            .collect();
        let connected = is_connected(&neighbors);
        if !connected && n_clients > 1 {
            log::info!("client graph with {n_clients} vertices is disconnected");
        }
        ClientGraph {
            n_clients,
            edges,
            adjacency,
            degrees,
            laplacian,
            rho,
            neighbors,
            connected,
        }
    }

    /// Every pair connected with weight `weight`.
    pub fn complete(n_clients: usize, weight: f64) -> Result<Self> {
        let edges: Vec<_> = (0..n_clients)
            .flat_map(|k| ((k + 1)..n_clients).map(move |l| (k, l, weight)))
            .collect();
        Self::build(n_clients, &edges)
    }

    /// Star with hub vertex 0 joined to clients `1..=n_clients` at unit weight.
    pub fn star(n_clients: usize) -> Result<Self> {
        let edges: Vec<_> = (1..=n_clients).map(|k| (0, k, 1.0)).collect();
        Self::build(n_clients + 1, &edges)
    }

    pub fn ring(n_clients: usize, weight: f64) -> Result<Self> {
        let edges: Vec<_> = match n_clients {
            0 | 1 => Vec::new(),
            2 => vec![(0, 1, weight)],
            n => (0..n).map(|k| (k, (k + 1) % n, weight)).collect(),
        };
        Self::build(n_clients, &edges)
    }

    /// Erdős–Rényi graph: each pair joined independently with probability `p`.
    pub fn random<R: Rng + ?Sized>(n_clients: usize, p: f64, weight: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("edge probability {p} not in [0, 1]")));
        }
        let mut edges = Vec::new();
        for k in 0..n_clients {
            for l in (k + 1)..n_clients {
                if rng.random::<f64>() < p {
                    edges.push((k, l, weight));
                }
            }
        }
        Self::build(n_clients, &edges)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        Self::build(file.n, &file.edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            n: self.n_clients,
            edges: self
                .edges
                .iter()
                .map(|&(k, l)| (k, l, self.adjacency[k][l]))
                .collect(),
        };
        serde_json::to_string(&file).expect("graph serializes")
    }

    pub fn n_clients(&self) -> usize {
        self.n_clients
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    pub fn weight(&self, k: usize, l: usize) -> f64 {
        self.adjacency[k][l]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn laplacian(&self) -> &Matrix {
        &self.laplacian
    }

    /// Spectral norm of the Laplacian (its largest eigenvalue).
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn neighbors(&self, k: usize) -> &[(usize, f64)] {
        &self.neighbors[k]
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// `½ Σ_k Σ_{l∈N_k} a_kl ‖w_k − w_l‖²`, i.e. `Wᵀ(L⊗I)W`, summed pairwise.
    pub fn laplacian_quadratic(&self, w: &StackedParams) -> Result<f64> {
        w.check_shape(self.n_clients)?;
        Ok(self
            .edges
            .iter()
            .map(|&(k, l)| self.adjacency[k][l] * dist_sq(w.block(k), w.block(l)))
            .sum())
    }

    /// Blockwise `(L⊗I)W`: `(LW)_k = Σ_l a_kl (w_k − w_l)`.
    pub fn laplacian_apply(&self, w: &StackedParams) -> Result<StackedParams> {
        w.check_shape(self.n_clients)?;
        let d = w.dim();
        let blocks = (0..self.n_clients)
            .map(|k| {
                let wk = w.block(k);
                let mut out = vec![0.0; d];
                for &(l, a) in &self.neighbors[k] {
                    for ((o, x), y) in out.iter_mut().zip(wk).zip(w.block(l)) {
                        *o += a * (x - y);
                    }
                }
                out
            })
            .collect();
        StackedParams::new(blocks)
    }

    /// Max `‖w_k − w_l‖` over edges with positive weight; 0 without edges.
    pub fn disagreement(&self, w: &StackedParams) -> f64 {
        self.edges
            .iter()
            .filter(|&&(k, l)| self.adjacency[k][l] > 0.0)
            .map(|&(k, l)| dist_sq(w.block(k), w.block(l)).sqrt())
            .fold(0.0, f64::max)
    }

    /// Reweights every structural edge according to `scenario`.
    pub fn assign_weights<R: Rng + ?Sized>(&self, scenario: &WeightScenario, rng: &mut R) -> Result<Self> {
        let weight_of: Box<dyn Fn(usize, usize, &mut R) -> f64> = match scenario {
            WeightScenario::Random => Box::new(|_, _, rng: &mut R| {
                let x: f64 = rng.sample(StandardNormal);
                x.abs().min(1.0)
            }),
            &WeightScenario::Equal(c) => {
                if !(c >= 0.0) {
                    return Err(Error::NegativeWeight { k: 0, l: 0, weight: c });
                }
                Box::new(move |_, _, _: &mut R| c)
            }
            WeightScenario::Weighted {
                small_set,
                c_small,
                c_mixed,
                c_full,
            } => {
                let small: BTreeSet<usize> = small_set.iter().copied().collect();
                if let Some(&bad) = small.iter().find(|&&k| k >= self.n_clients) {
                    return Err(Error::IndexOutOfRange {
                        index: bad,
                        n: self.n_clients,
                    });
                }
                let (cs, cm, cf) = (*c_small, *c_mixed, *c_full);
                Box::new(move |k, l, _: &mut R| {
                    match (small.contains(&k), small.contains(&l)) {
                        (true, true) => cs,
                        (false, false) => cf,
                        _ => cm,
                    }
                })
            }
            WeightScenario::Similar(label_sets) => {
                if label_sets.len() != self.n_clients {
                    return Err(Error::MissingLabelSets);
                }
                let sets: Vec<BTreeSet<usize>> = label_sets
                    .iter()
                    .map(|s| s.iter().copied().collect())
                    .collect();
                Box::new(move |k, l, _: &mut R| match sets[k].intersection(&sets[l]).count() {
                    0 => 0.0,
                    1 => 0.5,
                    _ => 1.0,
                })
            }
        };
        let mut adjacency = vec![vec![0.0; self.n_clients]; self.n_clients];
        for &(k, l) in &self.edges {
            let w = weight_of(k, l, rng);
            adjacency[k][l] = w;
            adjacency[l][k] = w;
        }
        Ok(Self::from_parts(self.n_clients, self.edges.clone(), adjacency))
    }
}

fn is_connected(neighbors: &[Vec<(usize, f64)>]) -> bool {
    let n = neighbors.len();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(k) = queue.pop_front() {
        for &(l, _) in &neighbors[k] {
            if !seen[l] {
                seen[l] = true;
                count += 1;
                queue.push_back(l);
            }
        }
    }
    count == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_node_laplacian() {
        let g = ClientGraph::build(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(g.laplacian(), &vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_relative_eq!(g.rho(), 2.0, epsilon = 1e-12);
        assert!(g.is_connected());
    }

    #[test]
    fn empty_graph() {
        let g = ClientGraph::build(3, &[]).unwrap();
        assert!(g.laplacian().iter().flatten().all(|&v| v == 0.0));
        assert_eq!(g.rho(), 0.0);
        assert!(!g.is_connected());
        let w = StackedParams::from_scalars(&[1.0, -5.0, 9.0]);
        assert_eq!(g.laplacian_quadratic(&w).unwrap(), 0.0);
    }

    #[test]
    fn path_three_rho() {
        let g = ClientGraph::build(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_relative_eq!(g.rho(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            ClientGraph::build(2, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::DuplicateEdge(1, 0))
        ));
        assert!(matches!(ClientGraph::build(2, &[(1, 1, 1.0)]), Err(Error::SelfLoop(1))));
        assert!(matches!(
            ClientGraph::build(2, &[(0, 1, -0.5)]),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(matches!(
            ClientGraph::build(2, &[(0, 2, 1.0)]),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn quadratic_two_nodes() {
        let g = ClientGraph::build(2, &[(0, 1, 1.0)]).unwrap();
        let w = StackedParams::from_scalars(&[1.0, 3.0]);
        assert_eq!(g.laplacian_quadratic(&w).unwrap(), 4.0);
        assert!(matches!(
            g.laplacian_quadratic(&StackedParams::from_scalars(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn consensus_has_zero_energy() {
        let g = ClientGraph::complete(5, 0.7).unwrap();
        let w = StackedParams::new(vec![vec![0.3, -2.0]; 5]).unwrap();
        assert_eq!(g.laplacian_quadratic(&w).unwrap(), 0.0);
        assert_eq!(g.disagreement(&w), 0.0);
    }

    #[test]
    fn equal_scenario() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = ClientGraph::complete(3, 1.0)
            .unwrap()
            .assign_weights(&WeightScenario::Equal(0.5), &mut rng)
            .unwrap();
        for k in 0..3 {
            for l in 0..3 {
                assert_eq!(g.weight(k, l), if k == l { 0.0 } else { 0.5 });
            }
        }
    }

    #[test]
    fn similar_scenario() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sets = vec![vec![1, 2], vec![1, 2], vec![3, 4]];
        let g = ClientGraph::complete(3, 1.0)
            .unwrap()
            .assign_weights(&WeightScenario::Similar(sets), &mut rng)
            .unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(0, 2), 0.0);
        assert_eq!(g.weight(1, 2), 0.0);

        let one_shared = vec![vec![1, 2], vec![2, 3], vec![4, 5]];
        let g = ClientGraph::complete(3, 1.0)
            .unwrap()
            .assign_weights(&WeightScenario::Similar(one_shared), &mut rng)
            .unwrap();
        assert_eq!(g.weight(0, 1), 0.5);
    }

    #[test]
    fn similar_needs_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = ClientGraph::complete(3, 1.0).unwrap();
        assert!(matches!(
            g.assign_weights(&WeightScenario::Similar(vec![]), &mut rng),
            Err(Error::MissingLabelSets)
        ));
    }

    #[test]
    fn weighted_scenario() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = ClientGraph::complete(3, 1.0)
            .unwrap()
            .assign_weights(&WeightScenario::weighted(vec![0, 1]), &mut rng)
            .unwrap();
        assert_eq!(g.weight(0, 1), 0.0);
        assert_eq!(g.weight(0, 2), 0.5);
        assert_eq!(g.weight(1, 2), 0.5);
        // zero-weight edge drops out of the neighborhood
        assert_eq!(g.neighbors(0), &[(2, 0.5)]);

        let g4 = ClientGraph::complete(4, 1.0)
            .unwrap()
            .assign_weights(&WeightScenario::weighted(vec![0]), &mut rng)
            .unwrap();
        assert_eq!(g4.weight(2, 3), 1.0);
    }

    #[test]
    fn random_scenario_in_unit_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = ClientGraph::complete(12, 1.0)
            .unwrap()
            .assign_weights(&WeightScenario::Random, &mut rng)
            .unwrap();
        let ws: Vec<f64> = g.edges().iter().map(|&(k, l)| g.weight(k, l)).collect();
        assert!(ws.iter().all(|&w| (0.0..=1.0).contains(&w)));
        assert!(ws.iter().any(|&w| w < 1.0));
    }

    #[test]
    fn star_and_ring() {
        let s = ClientGraph::star(3).unwrap();
        assert_eq!(s.n_clients(), 4);
        assert_eq!(s.edges(), &[(0, 1), (0, 2), (0, 3)]);
        assert!((1..4).all(|k| s.weight(0, k) == 1.0));
        // star K_{1,n} Laplacian spectrum is {0, 1 (n-1 times), n+1}
        assert_relative_eq!(s.rho(), 4.0, epsilon = 1e-10);
        let r = ClientGraph::ring(4, 1.0).unwrap();
        assert_relative_eq!(r.rho(), 4.0, epsilon = 1e-10);
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let g = ClientGraph::from_json_str(r#"{"n": 3, "edges": [[0, 1, 1.0], [1, 2, 0.5]]}"#).unwrap();
        assert_eq!(g.weight(2, 1), 0.5);
        assert_eq!(ClientGraph::from_json_str(&g.to_json()).unwrap(), g);
        assert!(ClientGraph::from_json_str(r#"{"n": 2, "edges": [[0, 0, 1.0]]}"#).is_err());
        assert!(ClientGraph::from_json_str(r#"{"n": 2, "edges": [], "extra": 1}"#).is_err());
    }
}
