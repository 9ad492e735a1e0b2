use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::data::ClientDataset;
use crate::error::{Error, Result};
use crate::linalg::dist_sq;
use crate::models::LossModel;

/// Monte-Carlo estimate of `Σ_k E‖∇F̃_k(w_k) − ∇F_k(w_k)‖²` at one random
/// `W ~ N(0, I)` drawn from `rng`.
///
/// Batches are clamped to each client's sample count, as in local training.
/// `n_draws` below 100 is raised to 100.
pub fn estimate_variance<M: LossModel>(
    models: &[M],
    data: &[ClientDataset],
    batch_size: usize,
    n_draws: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if models.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: models.len(),
            got: data.len(),
        });
    }
    let draws = n_draws.max(100);
    let points: Vec<Vec<f64>> = models
        .iter()
        .map(|m| (0..m.param_dim()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mut total = 0.0;
    for ((m, c), w) in models.iter().zip(data).zip(&points) {
        if !m.uses_data() {
            continue;
        }
        let exact = m.grad(w, &c.train)?;
        let batch = batch_size.min(c.train.len());
        let mut acc = 0.0;
        for _ in 0..draws {
            acc += dist_sq(&m.stoch_grad(w, &c.train, batch, rng)?, &exact);
        }
        total += acc / draws as f64;
    }
    Ok(total)
}
