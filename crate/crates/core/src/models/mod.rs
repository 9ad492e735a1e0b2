//! Per-client loss models `F_k` with exact and mini-batch gradients.

use rand::seq::index;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::data::Samples;
use crate::error::{Error, Result};
use crate::linalg::{dist_sq, norm_sq};

mod mlp;
mod mlr;
mod quadratic;

pub use mlp::MlpModel;
pub use mlr::MlrModel;
pub use quadratic::QuadraticModel;

/// A client objective `F_k(w) = mean over samples of f_k(w; ζ)`.
pub trait LossModel {
    fn param_dim(&self) -> usize;

    fn init_params(&self, rng: &mut dyn RngCore) -> Vec<f64>;

    fn loss(&self, w: &[f64], data: &Samples) -> Result<f64>;

    fn grad(&self, w: &[f64], data: &Samples) -> Result<Vec<f64>>;

    /// Gradient of the loss restricted to the rows `idx` (regularizers included).
    fn batch_grad(&self, w: &[f64], data: &Samples, idx: &[usize]) -> Result<Vec<f64>>;

    /// Whether the loss depends on samples at all.
    fn uses_data(&self) -> bool {
        true
    }

    /// Mini-batch gradient over `batch_size` rows drawn uniformly without
    /// replacement. A full batch returns [`LossModel::grad`] exactly.
    fn stoch_grad(&self, w: &[f64], data: &Samples, batch_size: usize, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        if !self.uses_data() {
            return self.grad(w, data);
        }
        if batch_size == 0 || batch_size > data.len() {
            return Err(Error::BatchTooLarge {
                batch: batch_size,
                available: data.len(),
            });
        }
        if batch_size == data.len() {
            return self.grad(w, data);
        }
        let idx = index::sample(rng, data.len(), batch_size).into_vec();
        self.batch_grad(w, data, &idx)
    }

    /// Classification accuracy, when the model is a classifier.
    fn accuracy(&self, _w: &[f64], _data: &Samples) -> Option<f64> {
        None
    }

    /// A guaranteed global smoothness constant, when one is known analytically.
    fn smoothness_bound(&self, _data: &Samples) -> Option<f64> {
        None
    }
}

/// The closed set of models a run can mix.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Quadratic(QuadraticModel),
    Mlr(MlrModel),
    Mlp(MlpModel),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Quadratic($m) => $e,
            Model::Mlr($m) => $e,
            Model::Mlp($m) => $e,
        }
    };
}

impl LossModel for Model {
    fn param_dim(&self) -> usize {
        dispatch!(self, m => m.param_dim())
    }
    fn init_params(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        dispatch!(self, m => m.init_params(rng))
    }
    fn loss(&self, w: &[f64], data: &Samples) -> Result<f64> {
        dispatch!(self, m => m.loss(w, data))
    }
    fn grad(&self, w: &[f64], data: &Samples) -> Result<Vec<f64>> {
        dispatch!(self, m => m.grad(w, data))
    }
    fn batch_grad(&self, w: &[f64], data: &Samples, idx: &[usize]) -> Result<Vec<f64>> {
        dispatch!(self, m => m.batch_grad(w, data, idx))
    }
    fn uses_data(&self) -> bool {
        dispatch!(self, m => m.uses_data())
    }
    fn stoch_grad(&self, w: &[f64], data: &Samples, batch_size: usize, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        dispatch!(self, m => m.stoch_grad(w, data, batch_size, rng))
    }
    fn accuracy(&self, w: &[f64], data: &Samples) -> Option<f64> {
        dispatch!(self, m => m.accuracy(w, data))
    }
    fn smoothness_bound(&self, data: &Samples) -> Option<f64> {
        dispatch!(self, m => m.smoothness_bound(data))
    }
}

impl From<QuadraticModel> for Model {
    fn from(m: QuadraticModel) -> Self {
        Model::Quadratic(m)
    }
}

impl From<MlrModel> for Model {
    fn from(m: MlrModel) -> Self {
        Model::Mlr(m)
    }
}

impl From<MlpModel> for Model {
    fn from(m: MlpModel) -> Self {
        Model::Mlp(m)
    }
}

/// Probed lower bound on the smoothness constant:
/// `max ‖∇F(w) − ∇F(w')‖ / ‖w − w'‖` over random pairs, half of them far
/// apart and half a small perturbation apart.
pub fn estimate_smoothness<M: LossModel + ?Sized>(
    model: &M,
    data: &Samples,
    n_probes: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    let d = model.param_dim();
    let mut best = 0.0f64;
    for probe in 0..n_probes.max(1) {
        let w: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let step = if probe % 2 == 0 { 1.0 } else { 1e-3 };
        let w2: Vec<f64> = w
            .iter()
            .map(|x| x + step * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let gap = dist_sq(&w, &w2).sqrt();
        if gap == 0.0 {
            continue;
        }
        let g1 = model.grad(&w, data)?;
        let g2 = model.grad(&w2, data)?;
        best = best.max(dist_sq(&g1, &g2).sqrt() / gap);
    }
    Ok(best)
}

pub(crate) fn check_dim(w: &[f64], dim: usize) -> Result<()> {
    if w.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: w.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_data(data: &Samples, n_features: usize) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.n_features != n_features {
        return Err(Error::DimensionMismatch {
            expected: n_features,
            got: data.n_features,
        });
    }
    Ok(())
}

/// In-place softmax; returns `log Σ exp(z)`.
pub(crate) fn softmax_in_place(z: &mut [f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
    max + sum.ln()
}

pub(crate) fn argmax(z: &[f64]) -> usize {
    z.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

pub(crate) fn l2_term(w: &[f64], alpha: f64) -> f64 {
    0.5 * alpha * norm_sq(w)
}
