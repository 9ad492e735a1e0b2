use rand::RngCore;

use super::{check_dim, LossModel};
use crate::data::Samples;
use crate::error::Result;
use crate::linalg::dist_sq;

/// `F(w) = (curvature / 2) ‖w − center‖²`, independent of data.
///
/// With `curvature = 0` this is the zero loss used for a virtual server vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub center: Vec<f64>,
    pub curvature: f64,
}

impl QuadraticModel {
    pub fn new(center: Vec<f64>, curvature: f64) -> Self {
        QuadraticModel { center, curvature }
    }

    pub fn unit(center: Vec<f64>) -> Self {
        Self::new(center, 1.0)
    }

    /// The zero loss `F_0 ≡ 0` in dimension `dim`.
    pub fn zero_loss(dim: usize) -> Self {
        Self::new(vec![0.0; dim], 0.0)
    }
}

impl LossModel for QuadraticModel {
    fn param_dim(&self) -> usize {
        self.center.len()
    }

    fn init_params(&self, _rng: &mut dyn RngCore) -> Vec<f64> {
        vec![0.0; self.center.len()]
    }

    fn loss(&self, w: &[f64], _data: &Samples) -> Result<f64> {
        check_dim(w, self.center.len())?;
        Ok(0.5 * self.curvature * dist_sq(w, &self.center))
    }

    fn grad(&self, w: &[f64], _data: &Samples) -> Result<Vec<f64>> {
        check_dim(w, self.center.len())?;
        Ok(w.iter().zip(&self.center).map(|(x, c)| self.curvature * (x - c)).collect())
    }

    fn batch_grad(&self, w: &[f64], data: &Samples, _idx: &[usize]) -> Result<Vec<f64>> {
        self.grad(w, data)
    }

    fn uses_data(&self) -> bool {
        false
    }

    fn smoothness_bound(&self, _data: &Samples) -> Option<f64> {
        Some(self.curvature)
    }
}
