use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ClientGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// FedU: a server samples clients and applies the regularization.
    #[default]
    Centralized,
    /// dFedU: every client acts each round and regularizes with its neighbors.
    Decentralized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Local step size μ.
    pub local_lr: f64,
    /// Local SGD steps per round, R.
    pub local_steps: usize,
    /// Communication rounds, T.
    pub rounds: usize,
    /// Regularization strength η.
    pub eta: f64,
    /// Clients sampled per round, S.
    pub sample_size: usize,
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    /// α for the weighted output iterate; requires `keep_iterates`.
    #[serde(default)]
    pub avg_alpha: Option<f64>,
    /// Restrict the neighbor sum to sampled neighbors instead of using stale models.
    #[serde(default)]
    pub sampled_neighbors_only: bool,
    #[serde(default)]
    pub keep_iterates: bool,
    /// Record every `eval_every` rounds (the last round is always recorded).
    /// `None` means every round for `T ≤ 500` and every 5 rounds otherwise.
    #[serde(default)]
    pub eval_every: Option<usize>,
    /// Worker threads for local updates; `None` uses the rayon default.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl TrainConfig {
    pub fn new(local_lr: f64, local_steps: usize, rounds: usize, eta: f64, sample_size: usize, batch_size: usize) -> Self {
        TrainConfig {
            local_lr,
            local_steps,
            rounds,
            eta,
            sample_size,
            batch_size,
            seed: 0,
            mode: Mode::Centralized,
            avg_alpha: None,
            sampled_neighbors_only: false,
            keep_iterates: false,
            eval_every: None,
            threads: None,
        }
    }

    /// μ̃ = μR.
    pub fn global_lr(&self) -> f64 {
        self.local_lr * self.local_steps as f64
    }

    /// τ = S / N.
    pub fn sampling_factor(&self, n_clients: usize) -> f64 {
        self.sample_size as f64 / n_clients as f64
    }

    pub fn eval_cadence(&self) -> usize {
        self.eval_every
            .unwrap_or(if self.rounds <= 500 { 1 } else { 5 })
            .max(1)
    }

    /// `μ̃ηρ ≤ 2`: the full-participation server matrix is non-expansive.
    pub fn step_size_valid(&self, graph: &ClientGraph) -> bool {
        self.global_lr() * self.eta * graph.rho() <= 2.0 + 1e-12
    }

    pub fn validate(&self, n_clients: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.local_lr > 0.0) || !self.local_lr.is_finite() {
            return bad(format!("local_lr must be positive, got {}", self.local_lr));
        }
        if self.local_steps == 0 {
            return bad("local_steps must be at least 1".into());
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return bad(format!("eta must be non-negative, got {}", self.eta));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.mode == Mode::Centralized && (self.sample_size == 0 || self.sample_size > n_clients) {
            return Err(Error::InvalidSampleSize {
                sample_size: self.sample_size,
                n_clients,
            });
        }
        if let Some(alpha) = self.avg_alpha {
            if !(alpha > 0.0) {
                return bad(format!("avg_alpha must be positive, got {alpha}"));
            }
        }
        Ok(())
    }
}
