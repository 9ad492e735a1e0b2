use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::data::ClientDataset;
use crate::error::{Error, Result};
use crate::graph::ClientGraph;
use crate::linalg::norm_sq;
use crate::models::LossModel;
use crate::params::StackedParams;

/// Outcome of checking `Σ‖∇F_k(w_k)‖² ≤ σ₂² + Σ‖∇_{w_k}J(W)‖²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaOneReport {
    pub eta: f64,
    pub rho: f64,
    pub beta_estimate: f64,
    pub sigma2_squared: f64,
    pub n_trials: usize,
    /// Largest `LHS − RHS` seen; negative means the bound held everywhere.
    pub max_violation: f64,
    /// Trials with `LHS − RHS > 1e-9 · (1 + RHS)`.
    pub violations: usize,
}

/// `σ₂² = ‖∇F(0)‖² · ηρ / (ηρ − 2β)`; requires `ηρ > 2β`.
pub fn sigma2_squared(grad_at_zero_sq: f64, eta: f64, rho: f64, beta: f64) -> Result<f64> {
    let er = eta * rho;
    if !(er > 2.0 * beta) {
        return Err(Error::PreconditionViolated(format!(
            "need eta * rho > 2 beta, got {er} <= {}",
            2.0 * beta
        )));
    }
    Ok(grad_at_zero_sq * er / (er - 2.0 * beta))
}

/// Evaluates both sides of the bounded-gradient inequality at `W = 0` and at
/// `n_trials` random points whose norms sweep `1e-2..1e2` log-uniformly.
///
/// `β` is the largest analytic smoothness bound among the clients; models
/// without one are rejected, since a probed lower bound could produce false
/// violations.
pub fn check_lemma1<M: LossModel>(
    models: &[M],
    data: &[ClientDataset],
    graph: &ClientGraph,
    eta: f64,
    n_trials: usize,
    rng: &mut dyn RngCore,
) -> Result<LemmaOneReport> {
    let n = graph.n_clients();
    if models.len() != n || data.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: models.len(),
        });
    }
    let mut beta = 0.0f64;
    for (m, c) in models.iter().zip(data) {
        let b = m.smoothness_bound(&c.train).ok_or_else(|| {
            Error::PreconditionViolated("a model has no analytic smoothness bound".into())
        })?;
        beta = beta.max(b);
    }
    let rho = graph.rho();
    let dim = models.first().map_or(0, |m| m.param_dim());
    let zero = StackedParams::zeros(n, dim);
    let grads_at_zero = client_grads(models, data, &zero)?;
    let g0: f64 = grads_at_zero.iter().map(|g| norm_sq(g)).sum();
    let sigma2_sq = sigma2_squared(g0, eta, rho, beta)?;

    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = 0;
    for trial in 0..=n_trials {
        let w = if trial == 0 {
            zero.clone()
        } else {
            random_point(rng, n, dim)
        };
        let grads = client_grads(models, data, &w)?;
        let lw = graph.laplacian_apply(&w)?;
        let lhs: f64 = grads.iter().map(|g| norm_sq(g)).sum();
        let grad_j: f64 = grads
            .iter()
            .enumerate()
            .map(|(k, g)| g.iter().zip(lw.block(k)).map(|(a, b)| (a + eta * b).powi(2)).sum::<f64>())
            .sum();
        let rhs = sigma2_sq + grad_j;
        let margin = lhs - rhs;
        max_violation = max_violation.max(margin);
        if margin > 1e-9 * (1.0 + rhs) {
            violations += 1;
        }
    }
    Ok(LemmaOneReport {
        eta,
        rho,
        beta_estimate: beta,
        sigma2_squared: sigma2_sq,
        n_trials,
        max_violation,
        violations,
    })
}

fn client_grads<M: LossModel>(models: &[M], data: &[ClientDataset], w: &StackedParams) -> Result<Vec<Vec<f64>>> {
    models
        .iter()
        .zip(data)
        .enumerate()
        .map(|(k, (m, c))| m.grad(w.block(k), &c.train))
        .collect()
}

fn random_point(rng: &mut dyn RngCore, n: usize, dim: usize) -> StackedParams {
    let mut blocks: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let norm = blocks.iter().map(|b| norm_sq(b)).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let target = 10f64.powf(rng.random_range(-2.0..=2.0));
    for v in blocks.iter_mut().flatten() {
        *v *= target / norm;
    }
    StackedParams::new(blocks).expect("uniform blocks")
}
