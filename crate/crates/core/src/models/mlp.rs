use rand::{Rng, RngCore};

use super::{argmax, check_data, check_dim, l2_term, softmax_in_place, LossModel};
use crate::data::Samples;
use crate::error::Result;

/// One-hidden-layer ReLU network with a softmax cross-entropy output.
///
/// Flat layout: `W1 (hidden × in)`, `b1 (hidden)`, `W2 (out × hidden)`, `b2 (out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub n_inputs: usize,
    pub hidden: usize,
    pub n_outputs: usize,
    pub l2_alpha: f64,
}

struct Offsets {
    b1: usize,
    w2: usize,
    b2: usize,
    end: usize,
}

impl MlpModel {
    pub fn new(n_inputs: usize, hidden: usize, n_outputs: usize) -> Self {
        MlpModel {
            n_inputs,
            hidden,
            n_outputs,
            l2_alpha: 0.0,
        }
    }

    pub fn with_l2(mut self, alpha: f64) -> Self {
        self.l2_alpha = alpha;
        self
    }

    fn offsets(&self) -> Offsets {
        let b1 = self.hidden * self.n_inputs;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.n_outputs * self.hidden;
        Offsets {
            b1,
            w2,
            b2,
            end: b2 + self.n_outputs,
        }
    }

    /// Hidden pre-activations and output logits for one row.
    fn forward_raw(&self, w: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let o = self.offsets();
        let pre: Vec<f64> = (0..self.hidden)
            .map(|h| {
                let row = &w[h * self.n_inputs..(h + 1) * self.n_inputs];
                row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[o.b1 + h]
            })
            .collect();
        let logits = (0..self.n_outputs)
            .map(|c| {
                let row = &w[o.w2 + c * self.hidden..o.w2 + (c + 1) * self.hidden];
                row.iter().zip(&pre).map(|(a, z)| a * z.max(0.0)).sum::<f64>() + w[o.b2 + c]
            })
            .collect();
        (pre, logits)
    }

    /// Output class probabilities for one row.
    pub fn forward(&self, w: &[f64], x: &[f64]) -> Vec<f64> {
        let (_, mut z) = self.forward_raw(w, x);
        softmax_in_place(&mut z);
        z
    }

    fn accumulate(&self, w: &[f64], data: &Samples, rows: impl Iterator<Item = usize>, mut grad: Option<&mut [f64]>) -> f64 {
        let o = self.offsets();
        let mut total = 0.0;
        let mut dh = vec![0.0; self.hidden];
        for i in rows {
            let x = data.row(i);
            let y = data.labels[i];
            let (pre, mut z) = self.forward_raw(w, x);
            let zy = z[y];
            total += softmax_in_place(&mut z) - zy;
            let Some(g) = grad.as_deref_mut() else { continue };
            dh.iter_mut().for_each(|v| *v = 0.0);
            for (c, p) in z.iter().enumerate() {
                let delta = p - if c == y { 1.0 } else { 0.0 };
                g[o.b2 + c] += delta;
                let base = o.w2 + c * self.hidden;
                for h in 0..self.hidden {
                    g[base + h] += delta * pre[h].max(0.0);
                    dh[h] += delta * w[base + h];
                }
            }
            for h in 0..self.hidden {
                // ReLU subgradient at 0 taken as 0
                if pre[h] <= 0.0 {
                    continue;
                }
                g[o.b1 + h] += dh[h];
                let row = &mut g[h * self.n_inputs..(h + 1) * self.n_inputs];
                for (gj, xj) in row.iter_mut().zip(x) {
                    *gj += dh[h] * xj;
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

impl LossModel for MlpModel {
    fn param_dim(&self) -> usize {
        self.offsets().end
    }

    /// Glorot-uniform weights, zero biases.
    fn init_params(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let o = self.offsets();
        let mut w = vec![0.0; o.end];
        let s1 = (6.0 / (self.n_inputs + self.hidden) as f64).sqrt();
        let s2 = (6.0 / (self.hidden + self.n_outputs) as f64).sqrt();
        for v in &mut w[..o.b1] {
            *v = rng.random_range(-s1..=s1);
        }
        for v in &mut w[o.w2..o.b2] {
            *v = rng.random_range(-s2..=s2);
        }
        w
    }

    fn loss(&self, w: &[f64], data: &Samples) -> Result<f64> {
        check_dim(w, self.param_dim())?;
        check_data(data, self.n_inputs)?;
        let ce = self.accumulate(w, data, 0..data.len(), None);
        Ok(ce / data.len() as f64 + l2_term(w, self.l2_alpha))
    }

    fn grad(&self, w: &[f64], data: &Samples) -> Result<Vec<f64>> {
        check_dim(w, self.param_dim())?;
        check_data(data, self.n_inputs)?;
        let mut g = vec![0.0; w.len()];
        self.accumulate(w, data, 0..data.len(), Some(&mut g));
        Ok(self.finish_grad(w, g, data.len()))
    }

    fn batch_grad(&self, w: &[f64], data: &Samples, idx: &[usize]) -> Result<Vec<f64>> {
        check_dim(w, self.param_dim())?;
        check_data(data, self.n_inputs)?;
        let mut g = vec![0.0; w.len()];
        self.accumulate(w, data, idx.iter().copied(), Some(&mut g));
        Ok(self.finish_grad(w, g, idx.len().max(1)))
    }

    fn accuracy(&self, w: &[f64], data: &Samples) -> Option<f64> {
        if data.is_empty() || w.len() != self.param_dim() {
            return None;
        }
        let hits = (0..data.len())
            .filter(|&i| argmax(&self.forward_raw(w, data.row(i)).1) == data.labels[i])
            .count();
        Some(hits as f64 / data.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_output_layer_is_uniform() {
        let m = MlpModel::new(4, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut w = m.init_params(&mut rng);
        let o = m.offsets();
        w[o.w2..].iter_mut().for_each(|v| *v = 0.0);
        let data = Samples::new(4, vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0, 1.0, -1.0], vec![2, 0]).unwrap();
        assert!((m.loss(&w, &data).unwrap() - 3f64.ln()).abs() < 1e-15);
        let all_zero = vec![0.0; m.param_dim()];
        assert!((m.loss(&all_zero, &data).unwrap() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn init_layout() {
        let m = MlpModel::new(3, 4, 2);
        assert_eq!(m.param_dim(), 3 * 4 + 4 + 2 * 4 + 2);
        let w = m.init_params(&mut ChaCha8Rng::seed_from_u64(1));
        let o = m.offsets();
        let s1 = (6.0f64 / 7.0).sqrt();
        assert!(w[..o.b1].iter().all(|v| v.abs() <= s1));
        assert!(w[o.b1..o.w2].iter().all(|&v| v == 0.0));
        assert!(w[o.b2..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn outputs_normalized() {
        let m = MlpModel::new(2, 6, 4);
        let w = m.init_params(&mut ChaCha8Rng::seed_from_u64(2));
        let p = m.forward(&w, &[10.0, -7.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
