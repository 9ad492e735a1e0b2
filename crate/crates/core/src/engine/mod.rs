//! FedU and dFedU training loops.
//!
//! A round samples clients (FedU only), runs `R` local SGD steps on each
//! active client, then applies the Laplacian correction
//! `w_k ← w_{k,R} − μ̃η Σ_{l∈N_k} a_kl (w_{k,R} − w_{l,R})` with `μ̃ = μR`.

mod averaging;
mod config;
mod history;
mod local;
mod matrix_form;
mod reductions;
mod run;
mod sampling;
mod server;

pub use averaging::{theta_weights, weighted_average};
pub use config::{Mode, TrainConfig};
pub use history::{RoundRecord, RunHistory};
pub use local::{local_update, LocalOutcome};
pub use matrix_form::{matrix_form_step, server_update_matrix, server_update_norm};
pub use reductions::{fedavg_mode, with_virtual_server, FedAvgGraph};
pub use run::{objective, run, run_dfedu, run_dfedu_from, run_fedu, run_fedu_from};
pub use sampling::sample_clients;
pub use server::{regularize_client, server_regularize, server_regularize_with, NeighborRule};
