use crate::error::{Error, Result};
use crate::graph::ClientGraph;
use crate::linalg::{mat_vec, solve, Matrix};
use crate::models::QuadraticModel;
use crate::params::StackedParams;

/// `∇J(W)` for quadratic clients: `c_k (w_k − center_k) + η (LW)_k`.
pub fn quadratic_gradient(graph: &ClientGraph, centers: &[Vec<f64>], curvatures: &[f64], eta: f64, w: &StackedParams) -> Result<StackedParams> {
    let lw = graph.laplacian_apply(w)?;
    let blocks = (0..graph.n_clients())
        .map(|k| {
            w.block(k)
                .iter()
                .zip(&centers[k])
                .zip(lw.block(k))
                .map(|((x, c), l)| curvatures[k] * (x - c) + eta * l)
                .collect()
        })
        .collect();
    StackedParams::new(blocks)
}

/// Closed-form minimizer of `J` for quadratic clients: solves
/// `(diag(curvatures) + ηL) W_{·j} = diag(curvatures) C_{·j}` per coordinate `j`
/// by dense elimination plus one round of iterative refinement.
pub fn solve_quadratic_optimum(graph: &ClientGraph, centers: &[Vec<f64>], curvatures: &[f64], eta: f64) -> Result<StackedParams> {
    let n = graph.n_clients();
    for len in [centers.len(), curvatures.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let centers_p = StackedParams::new(centers.to_vec())?;
    let d = centers_p.dim();
    let lap = graph.laplacian();
    let system: Matrix = (0..n)
        .map(|k| (0..n).map(|l| eta * lap[k][l] + if k == l { curvatures[k] } else { 0.0 }).collect())
        .collect();
    let mut columns = Vec::with_capacity(d);
    for j in 0..d {
        let rhs: Vec<f64> = (0..n).map(|k| curvatures[k] * centers[k][j]).collect();
        let mut x = solve(&system, &rhs)?;
        let ax = mat_vec(&system, &x);
        let resid: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let correction = solve(&system, &resid)?;
        x.iter_mut().zip(&correction).for_each(|(xi, ci)| *xi += ci);
        columns.push(x);
    }
    StackedParams::new((0..n).map(|k| columns.iter().map(|col| col[k]).collect()).collect())
}

pub fn solve_quadratic_models(graph: &ClientGraph, models: &[QuadraticModel], eta: f64) -> Result<StackedParams> {
    let centers: Vec<Vec<f64>> = models.iter().map(|m| m.center.clone()).collect();
    let curvatures: Vec<f64> = models.iter().map(|m| m.curvature).collect();
    solve_quadratic_optimum(graph, &centers, &curvatures, eta)
}

/// Limit of full-participation FedU with full-batch local steps on quadratic
/// clients: the fixed point of `W ↦ C (c + Q (W − c))`, where
/// `Q = diag((1 − μ c_k)^R)` and `C = I − μ̃ηL`.
///
/// It differs from [`solve_quadratic_optimum`] by `O(μ̃)`, and matches it only
/// when `η = 0`.
pub fn quadratic_fixed_point(
    graph: &ClientGraph,
    centers: &[Vec<f64>],
    curvatures: &[f64],
    eta: f64,
    local_lr: f64,
    local_steps: usize,
) -> Result<StackedParams> {
    let n = graph.n_clients();
    for len in [centers.len(), curvatures.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let centers_p = StackedParams::new(centers.to_vec())?;
    let coef = local_lr * local_steps as f64 * eta;
    let lap = graph.laplacian();
    let contraction: Vec<f64> = curvatures.iter().map(|c| (1.0 - local_lr * c).powi(local_steps as i32)).collect();
    let server: Matrix = (0..n)
        .map(|k| (0..n).map(|l| f64::from(u8::from(k == l)) - coef * lap[k][l]).collect())
        .collect();
    // (I − C Q) W = C (I − Q) c
    let system: Matrix = (0..n)
        .map(|k| (0..n).map(|l| f64::from(u8::from(k == l)) - server[k][l] * contraction[l]).collect())
        .collect();
    let mut columns = Vec::with_capacity(centers_p.dim());
    for j in 0..centers_p.dim() {
        let pulled: Vec<f64> = (0..n).map(|l| (1.0 - contraction[l]) * centers[l][j]).collect();
        columns.push(solve(&system, &mat_vec(&server, &pulled))?);
    }
    StackedParams::new((0..n).map(|k| columns.iter().map(|col| col[k]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair() -> ClientGraph {
        ClientGraph::build(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn two_client_reference() {
        let w = solve_quadratic_optimum(&pair(), &[vec![0.0], vec![4.0]], &[1.0, 1.0], 0.5).unwrap();
        assert_relative_eq!(w.block(0)[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(w.block(1)[0], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn fixed_point_matches_hand_formula() {
        // N = 2, unit curvature: difference δ = 4(1−ε)s / (s + ε − sε)
        let (mu, r, eta) = (0.1, 5, 0.5);
        let w = quadratic_fixed_point(&pair(), &[vec![0.0], vec![4.0]], &[1.0, 1.0], eta, mu, r).unwrap();
        let s = 1.0 - (1.0f64 - mu).powi(r as i32);
        let eps = mu * r as f64 * eta * 2.0;
        let delta = 4.0 * (1.0 - eps) * s / (s + eps - s * eps);
        assert_relative_eq!(w.block(1)[0] - w.block(0)[0], delta, epsilon = 1e-12);
        assert_relative_eq!(w.block(1)[0] + w.block(0)[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn fixed_point_unbiased_without_coupling() {
        let w = quadratic_fixed_point(&pair(), &[vec![0.0], vec![4.0]], &[1.0, 1.0], 0.0, 0.1, 5).unwrap();
        assert_relative_eq!(w.block(0)[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(w.block(1)[0], 4.0, epsilon = 1e-14);
    }

    #[test]
    fn decoupled_without_regularization() {
        let centers = vec![vec![1.0, -2.0], vec![4.0, 0.5]];
        let w = solve_quadratic_optimum(&pair(), &centers, &[1.0, 2.0], 0.0).unwrap();
        assert_eq!(w.into_blocks(), centers);
    }

    #[test]
    fn consensus_limit() {
        let w = solve_quadratic_optimum(&pair(), &[vec![0.0], vec![4.0]], &[1.0, 1.0], 1e6).unwrap();
        assert!((w.block(0)[0] - 2.0).abs() < 1e-5);
        assert!((w.block(1)[0] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn singular_when_unanchored() {
        let err = solve_quadratic_optimum(&pair(), &[vec![0.0], vec![4.0]], &[0.0, 0.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::SingularSystem));
        let err = solve_quadratic_optimum(&pair(), &[vec![0.0], vec![4.0]], &[0.0, 1.0], 0.0).unwrap_err();
        assert!(matches!(err, Error::SingularSystem));
        // one anchored vertex is enough on a connected graph
        assert!(solve_quadratic_optimum(&pair(), &[vec![0.0], vec![4.0]], &[0.0, 1.0], 1.0).is_ok());
    }
}
