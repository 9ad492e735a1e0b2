use rand::RngCore;

use super::{argmax, check_data, check_dim, l2_term, softmax_in_place, LossModel};
use crate::data::Samples;
use crate::error::Result;

/// Multinomial logistic regression with an L2 penalty.
///
/// Parameters are a row-major `n_classes × (n_features + 1)` matrix; the last
/// column of each row is the bias (a constant-1 feature). The penalty covers
/// every entry, bias included, so the loss is `l2_alpha`-strongly convex.
#[derive(Debug, Clone, PartialEq)]
pub struct MlrModel {
    pub n_features: usize,
    pub n_classes: usize,
    pub l2_alpha: f64,
}

impl MlrModel {
    pub fn new(n_features: usize, n_classes: usize, l2_alpha: f64) -> Self {
        MlrModel {
            n_features,
            n_classes,
            l2_alpha,
        }
    }

    fn stride(&self) -> usize {
        self.n_features + 1
    }

    /// Class logits for one feature row.
    pub fn logits(&self, w: &[f64], x: &[f64]) -> Vec<f64> {
        let s = self.stride();
        (0..self.n_classes)
            .map(|c| {
                let row = &w[c * s..(c + 1) * s];
                row[..self.n_features].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + row[self.n_features]
            })
            .collect()
    }

    /// Softmax class probabilities for one feature row.
    pub fn predict_proba(&self, w: &[f64], x: &[f64]) -> Vec<f64> {
        let mut z = self.logits(w, x);
        softmax_in_place(&mut z);
        z
    }

    /// Returns (sum of cross-entropies, sum of per-sample gradients) over `rows`.
    fn accumulate(&self, w: &[f64], data: &Samples, rows: impl Iterator<Item = usize>, grad: Option<&mut [f64]>) -> f64 {
        let s = self.stride();
        let mut total = 0.0;
        let mut grad = grad;
        for i in rows {
            let x = data.row(i);
            let y = data.labels[i];
            let mut z = self.logits(w, x);
            let zy = z[y];
            total += softmax_in_place(&mut z) - zy;
            if let Some(g) = grad.as_deref_mut() {
                for (c, p) in z.iter().enumerate() {
                    let delta = p - if c == y { 1.0 } else { 0.0 };
                    let row = &mut g[c * s..(c + 1) * s];
                    for (gj, xj) in row[..self.n_features].iter_mut().zip(x) {
                        *gj += delta * xj;
                    }
                    row[self.n_features] += delta;
                }
            }
        }
        total
    }

    fn finish_grad(&self, w: &[f64], mut g: Vec<f64>, count: usize) -> Vec<f64> {
        let inv = 1.0 / count as f64;
        for (gj, wj) in g.iter_mut().zip(w) {
            *gj = *gj * inv + self.l2_alpha * wj;
        }
        g
    }
}

impl LossModel for MlrModel {
    fn param_dim(&self) -> usize {
        self.n_classes * self.stride()
    }

    fn init_params(&self, _rng: &mut dyn RngCore) -> Vec<f64> {
        vec![0.0; self.param_dim()]
    }

    fn loss(&self, w: &[f64], data: &Samples) -> Result<f64> {
        check_dim(w, self.param_dim())?;
        check_data(data, self.n_features)?;
        let ce = self.accumulate(w, data, 0..data.len(), None);
        Ok(ce / data.len() as f64 + l2_term(w, self.l2_alpha))
    }

    fn grad(&self, w: &[f64], data: &Samples) -> Result<Vec<f64>> {
        check_dim(w, self.param_dim())?;
        check_data(data, self.n_features)?;
        let mut g = vec![0.0; w.len()];
        self.accumulate(w, data, 0..data.len(), Some(&mut g));
        Ok(self.finish_grad(w, g, data.len()))
    }

    fn batch_grad(&self, w: &[f64], data: &Samples, idx: &[usize]) -> Result<Vec<f64>> {
        check_dim(w, self.param_dim())?;
        check_data(data, self.n_features)?;
        let mut g = vec![0.0; w.len()];
        self.accumulate(w, data, idx.iter().copied(), Some(&mut g));
        Ok(self.finish_grad(w, g, idx.len().max(1)))
    }

    fn accuracy(&self, w: &[f64], data: &Samples) -> Option<f64> {
        if data.is_empty() || w.len() != self.param_dim() {
            return None;
        }
        let hits = (0..data.len())
            .filter(|&i| argmax(&self.logits(w, data.row(i))) == data.labels[i])
            .count();
        Some(hits as f64 / data.len() as f64)
    }

    /// `½ max_i ‖(x_i, 1)‖² + α`: the softmax Hessian block `diag(p) − ppᵀ`
    /// has spectral norm at most ½.
    fn smoothness_bound(&self, data: &Samples) -> Option<f64> {
        let max_sq = (0..data.len())
            .map(|i| data.row(i).iter().map(|v| v * v).sum::<f64>() + 1.0)
            .fold(0.0f64, f64::max);
        Some(0.5 * max_sq + self.l2_alpha)
    }
}
