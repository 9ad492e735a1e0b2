//! Matrix-notation server update `W⁺ = (I − μ̃η S̃ 𝓛) W_R`, kept as an
//! independent route to the same result as [`super::server_regularize`].

use crate::error::{Error, Result};
use crate::graph::ClientGraph;
use crate::linalg::{spectral_norm, Matrix};
use crate::params::StackedParams;

/// Applies `C = I − μ̃η S̃ (L⊗I_d)` to the stale-completed `W_R`, using the
/// dense Laplacian rows, then restores `W_t` on non-sampled blocks.
pub fn matrix_form_step(
    w_t: &StackedParams,
    w_r: &StackedParams,
    sampled: &[usize],
    graph: &ClientGraph,
    eta: f64,
    global_lr: f64,
) -> Result<StackedParams> {
    let n = graph.n_clients();
    w_t.check_shape(n)?;
    w_r.check_shape(n)?;
    if w_t.dim() != w_r.dim() {
        return Err(Error::DimensionMismatch {
            expected: w_t.dim(),
            got: w_r.dim(),
        });
    }
    let d = w_r.dim();
    let mut mask = vec![0.0; n];
    for &k in sampled {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
        mask[k] = 1.0;
    }
    let completed: Vec<&[f64]> = (0..n)
        .map(|k| if mask[k] == 1.0 { w_r.block(k) } else { w_t.block(k) })
        .collect();
    let lap = graph.laplacian();
    let blocks = (0..n)
        .map(|k| {
            if mask[k] == 0.0 {
                return w_t.block(k).to_vec();
            }
            (0..d)
                .map(|j| {
                    let lw: f64 = (0..n).map(|l| lap[k][l] * completed[l][j]).sum();
                    completed[k][j] - global_lr * eta * mask[k] * lw
                })
                .collect()
        })
        .collect();
    StackedParams::new(blocks)
}

/// The `N × N` server matrix `I − μ̃η diag(s) L`; the `d`-lifted operator has
/// the same norm.
pub fn server_update_matrix(graph: &ClientGraph, sampled: &[usize], eta: f64, global_lr: f64) -> Matrix {
    let n = graph.n_clients();
    let mut mask = vec![0.0; n];
    for &k in sampled {
        mask[k] = 1.0;
    }
    let lap = graph.laplacian();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|l| f64::from(u8::from(k == l)) - global_lr * eta * mask[k] * lap[k][l])
                .collect()
        })
        .collect()
}

/// `‖C‖` by power iteration.
pub fn server_update_norm(graph: &ClientGraph, sampled: &[usize], eta: f64, global_lr: f64) -> f64 {
    spectral_norm(&server_update_matrix(graph, sampled, eta, global_lr), 1e-13, 200_000)
}
