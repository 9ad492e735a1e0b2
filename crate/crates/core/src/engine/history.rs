use std::time::Duration;

use serde::Serialize;

use crate::params::StackedParams;

/// Snapshot after `round` completed rounds (round 0 is the initial state).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    /// `J(W) = Σ F_k(w_k) + (η/2) Σ_{(k,l)∈E} a_kl ‖w_k − w_l‖²`.
    pub objective: f64,
    pub train_loss: Vec<f64>,
    pub test_accuracy: Vec<Option<f64>>,
    /// Mean over active clients of `(1/R) Σ_r ‖w_{k,r} − w_k‖²` in the round
    /// that produced this state.
    pub drift: f64,
    /// Largest `‖w_k − w_l‖` over weighted edges.
    pub disagreement: f64,
    /// Clients active in the round that produced this state.
    pub sampled: Vec<usize>,
}

impl RoundRecord {
    pub fn mean_train_loss(&self) -> f64 {
        self.train_loss.iter().sum::<f64>() / self.train_loss.len().max(1) as f64
    }

    /// Mean test accuracy over clients that report one; `NaN` if none do.
    pub fn mean_test_accuracy(&self) -> f64 {
        mean_of(self.test_accuracy.iter().flatten().copied())
    }

    /// Mean test accuracy over the listed clients.
    pub fn mean_test_accuracy_of(&self, clients: &[usize]) -> f64 {
        mean_of(clients.iter().filter_map(|&k| self.test_accuracy[k]))
    }
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunHistory {
    pub records: Vec<RoundRecord>,
    /// `W^(0..=T)` when `keep_iterates` is set.
    #[serde(skip)]
    pub iterates: Vec<StackedParams>,
    #[serde(skip)]
    pub final_params: StackedParams,
    /// Whether `μ̃ηρ ≤ 2` held for the run's graph.
    pub step_size_valid: bool,
    pub wall_time: Duration,
}

impl RunHistory {
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn last(&self) -> &RoundRecord {
        self.records.last().expect("history always has the round-0 record")
    }
}
