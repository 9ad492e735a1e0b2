//! Laplacian-regularized federated multi-task learning.
//!
//! Every client `k` owns a model `w_k`; models are coupled through a weighted
//! client graph so the collective objective is
//!
//! ```text
//! J(W) = sum_k F_k(w_k) + (eta / 2) * sum_k sum_{l in N_k} (a_kl / 2) ||w_k - w_l||^2
//! ```
//!
//! The crate provides the centralized FedU loop (server samples clients, runs
//! local SGD, applies the Laplacian correction) and its decentralized
//! counterpart dFedU, together with the loss models, synthetic non-i.i.d.
//! data, and the oracles used to verify the update rules.

pub mod analysis;
pub mod data;
pub mod engine;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod models;
pub mod params;
pub mod rng;

pub use data::{ClientDataset, FederatedDataset, Samples};
pub use engine::{run_dfedu, run_fedu, Mode, RunHistory, TrainConfig};
pub use error::{Error, Result};
pub use graph::{ClientGraph, WeightScenario};
pub use models::{LossModel, MlpModel, MlrModel, Model, QuadraticModel};
pub use params::StackedParams;
