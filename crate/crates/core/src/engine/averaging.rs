use crate::error::{Error, Result};
use crate::params::StackedParams;

/// Normalized weights `θ^(t) / Θ_T` for `θ^(t) = (1 − μRSα/(4N))^{−(t+1)}`,
/// `t = 0..T-1`.
pub fn theta_weights(rounds: usize, local_lr: f64, local_steps: usize, sample_size: usize, n_clients: usize, alpha: f64) -> Result<Vec<f64>> {
    let base = local_lr * local_steps as f64 * sample_size as f64 * alpha / (4.0 * n_clients as f64);
    if !(base > 0.0 && base < 1.0) {
        return Err(Error::InvalidAlpha(base));
    }
    // divide through by θ^(T-1) so large T cannot overflow
    let ratio = 1.0 - base;
    let raw: Vec<f64> = (0..rounds).map(|t| ratio.powi((rounds - 1 - t) as i32)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / total).collect())
}

/// `W̃^(T) = Σ_t θ^(t) W^(t) / Θ_T` over the supplied iterates `W^(0..T-1)`.
pub fn weighted_average(
    iterates: &[StackedParams],
    local_lr: f64,
    local_steps: usize,
    sample_size: usize,
    n_clients: usize,
    alpha: f64,
) -> Result<StackedParams> {
    let first = iterates
        .first()
        .ok_or_else(|| Error::InvalidConfig("weighted average needs at least one iterate".into()))?;
    let weights = theta_weights(iterates.len(), local_lr, local_steps, sample_size, n_clients, alpha)?;
    let mut acc = StackedParams::zeros(first.n_clients(), first.dim());
    for (w, theta) in iterates.iter().zip(&weights) {
        w.check_shape(first.n_clients())?;
        for k in 0..first.n_clients() {
            for (a, x) in acc.block_mut(k).iter_mut().zip(w.block(k)) {
                *a += theta * x;
            }
        }
    }
    Ok(acc)
}
