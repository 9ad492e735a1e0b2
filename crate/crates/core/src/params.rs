use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, norm_sq};

/// The collective parameter vector `W = [w_1, ..., w_N]`, one block per client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedParams {
    blocks: Vec<Vec<f64>>,
}

impl StackedParams {
    /// Builds from per-client blocks; all blocks must share one length.
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(first) = blocks.first() {
            let d = first.len();
            if let Some(bad) = blocks.iter().find(|b| b.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: bad.len(),
                });
            }
        }
        Ok(StackedParams { blocks })
    }

    pub fn zeros(n_clients: usize, dim: usize) -> Self {
        StackedParams {
            blocks: vec![vec![0.0; dim]; n_clients],
        }
    }

    /// Convenience for scalar-per-client instances.
    pub fn from_scalars(values: &[f64]) -> Self {
        StackedParams {
            blocks: values.iter().map(|&v| vec![v]).collect(),
        }
    }

    pub fn n_clients(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }

    pub fn block(&self, k: usize) -> &[f64] {
        &self.blocks[k]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut Vec<f64> {
        &mut self.blocks[k]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Vec<f64>> {
        self.blocks
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().flatten().all(|v| v.is_finite())
    }

    /// Flattened `[w_1; ...; w_N]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| norm_sq(b)).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &StackedParams) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| dist_sq(a, b))
            .sum::<f64>()
            .sqrt()
    }

    /// Max absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &StackedParams) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }

    pub(crate) fn check_shape(&self, n_clients: usize) -> Result<()> {
        if self.n_clients() != n_clients {
            return Err(Error::DimensionMismatch {
                expected: n_clients,
                got: self.n_clients(),
            });
        }
        Ok(())
    }
}
