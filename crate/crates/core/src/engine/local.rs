use rand::RngCore;

use crate::data::Samples;
use crate::error::{Error, Result};
use crate::linalg::dist_sq;
use crate::models::LossModel;

/// Result of `R` local SGD steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOutcome {
    /// `w_{k,R}`.
    pub params: Vec<f64>,
    /// `w_{k,0}, ..., w_{k,R-1}`.
    pub iterates: Vec<Vec<f64>>,
}

impl LocalOutcome {
    /// `(1/R) Σ_r ‖w_{k,r} − w_{k,0}‖²`.
    pub fn drift(&self) -> f64 {
        let start = &self.iterates[0];
        self.iterates.iter().map(|w| dist_sq(w, start)).sum::<f64>() / self.iterates.len() as f64
    }
}

/// Runs `steps` mini-batch SGD steps from `start`.
///
/// The batch is clamped to the client's sample count, so clients with fewer
/// than `batch_size` samples take full-batch steps. A non-finite iterate is
/// reported as [`Error::NonFiniteParameter`] with round and client left at 0
/// for the caller to fill in.
pub fn local_update<M: LossModel + ?Sized>(
    model: &M,
    start: &[f64],
    steps: usize,
    lr: f64,
    batch_size: usize,
    data: &Samples,
    rng: &mut dyn RngCore,
) -> Result<LocalOutcome> {
    if steps == 0 {
        return Err(Error::InvalidConfig("local_steps must be at least 1".into()));
    }
    let batch = if model.uses_data() {
        batch_size.min(data.len())
    } else {
        batch_size
    };
    let mut w = start.to_vec();
    let mut iterates = Vec::with_capacity(steps);
    for _ in 0..steps {
        let g = model.stoch_grad(&w, data, batch, rng)?;
        iterates.push(w.clone());
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= lr * gi;
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteParameter {
                round: 0,
                client: 0,
                last_objective: f64::NAN,
            });
        }
    }
    Ok(LocalOutcome { params: w, iterates })
}
