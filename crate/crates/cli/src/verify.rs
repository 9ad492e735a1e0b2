//! Oracle suite behind `fedlap verify`.

use fedlap_core::analysis::{check_lemma1, quadratic_fixed_point, quadratic_gradient, solve_quadratic_optimum};
use fedlap_core::data::{data_free_clients, generate_synthetic, split, Samples, SyntheticSpec};
use fedlap_core::engine::{matrix_form_step, run_fedu_from, sample_clients, server_regularize};
use fedlap_core::linalg::dist_sq;
use fedlap_core::rng::stream;
use fedlap_core::{run_dfedu, run_fedu, ClientGraph, LossModel, MlpModel, MlrModel, Mode, QuadraticModel, StackedParams, TrainConfig};
use rand::Rng;

/// Signature of the server correction under test.
pub type Regularizer = fn(&StackedParams, &[usize], &ClientGraph, f64, f64) -> fedlap_core::Result<StackedParams>;

pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// `tol` bounds the per-coordinate gap in the matrix-form check.
pub fn run_checks(tol: f64) -> Vec<CheckResult> {
    run_checks_with(tol, server_regularize)
}

pub fn run_checks_with(tol: f64, regularizer: Regularizer) -> Vec<CheckResult> {
    vec![
        wrap("matrix_form", matrix_form(tol, regularizer)),
        wrap("quadratic_closed_form", quadratic_closed_form()),
        wrap("lemma1", lemma1()),
        wrap("gradients", gradients()),
        wrap("dfedu_equals_fedu", dfedu_equals_fedu()),
    ]
}

pub fn format_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    results
        .iter()
        .map(|r| format!("{:<width$}  {}  {}\n", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail))
        .collect()
}

fn wrap(name: &'static str, outcome: fedlap_core::Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn matrix_form(tol: f64, regularizer: Regularizer) -> fedlap_core::Result<(bool, String)> {
    let mut rng = stream(11, 0, 0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=10);
        let d = rng.random_range(1..=5);
        let p = rng.random_range(0.2..1.0);
        let mut edges = Vec::new();
        for k in 0..n {
            for l in k + 1..n {
                if rng.random_bool(p) {
                    edges.push((k, l, 1.0 - rng.random::<f64>()));
                }
            }
        }
        let g = ClientGraph::build(n, &edges)?;
        let s = rng.random_range(1..=n);
        let sampled = sample_clients(n, s, &mut rng)?;
        let w_t = StackedParams::new((0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect())?;
        let mut w_r = w_t.clone();
        for &k in &sampled {
            *w_r.block_mut(k) = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        }
        let eta = rng.random_range(0.0..2.0);
        let glr = rng.random_range(0.0..0.5);
        let a = regularizer(&w_r, &sampled, &g, eta, glr)?;
        let b = matrix_form_step(&w_t, &w_r, &sampled, &g, eta, glr)?;
        worst = worst.max(a.max_abs_diff(&b));
    }
    Ok((worst <= tol, format!("max gap {worst:.3e} over 50 rounds (tol {tol:.0e})")))
}

fn quadratic_closed_form() -> fedlap_core::Result<(bool, String)> {
    let g = ClientGraph::build(2, &[(0, 1, 1.0)])?;
    let centers = vec![vec![0.0], vec![4.0]];
    let curv = [1.0, 1.0];
    let eta = 0.5;
    let w_star = solve_quadratic_optimum(&g, &centers, &curv, eta)?;
    let residual = quadratic_gradient(&g, &centers, &curv, eta, &w_star)?.norm();
    let exact = (w_star.block(0)[0] - 1.0).abs().max((w_star.block(1)[0] - 3.0).abs());
    let models: Vec<QuadraticModel> = centers.iter().map(|c| QuadraticModel::unit(c.clone())).collect();
    let mut cfg = TrainConfig::new(0.1, 5, 500, eta, 2, 1);
    cfg.eval_every = Some(500);
    let h = run_fedu_from(&g, &models, &data_free_clients(2), &cfg, StackedParams::zeros(2, 1))?;
    let limit = quadratic_fixed_point(&g, &centers, &curv, eta, cfg.local_lr, cfg.local_steps)?;
    let gap = h.final_params.max_abs_diff(&limit);
    Ok((
        residual <= 1e-10 && exact <= 1e-12 && gap <= 1e-10,
        format!("W* residual {residual:.1e}, |W* - (1,3)| {exact:.1e}, run vs iteration limit {gap:.1e}"),
    ))
}

fn lemma1() -> fedlap_core::Result<(bool, String)> {
    let g = ClientGraph::build(2, &[(0, 1, 1.0)])?;
    let models = vec![QuadraticModel::unit(vec![0.0]), QuadraticModel::unit(vec![4.0])];
    let report = check_lemma1(&models, &data_free_clients(2), &g, 2.0, 1000, &mut stream(12, 0, 0))?;
    let sigma_ok = (report.sigma2_squared - 32.0).abs() <= 1e-12 * 32.0;
    Ok((
        sigma_ok && report.violations == 0,
        format!(
            "sigma2^2 = {}, violations {} / {}",
            report.sigma2_squared, report.violations, report.n_trials
        ),
    ))
}

fn fd_error<M: LossModel>(model: &M, w: &[f64], data: &Samples, h: f64) -> fedlap_core::Result<f64> {
    let g = model.grad(w, data)?;
    let mut probe = w.to_vec();
    let mut fd = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        probe[i] = w[i] + h;
        let up = model.loss(&probe, data)?;
        probe[i] = w[i] - h;
        let down = model.loss(&probe, data)?;
        probe[i] = w[i];
        fd.push((up - down) / (2.0 * h));
    }
    let scale = dist_sq(&g, &vec![0.0; g.len()]).sqrt().max(1e-12);
    Ok(dist_sq(&g, &fd).sqrt() / scale)
}

fn gradients() -> fedlap_core::Result<(bool, String)> {
    let mut spec = SyntheticSpec::new(2, 5, 4, 2);
    spec.samples_mean = 30.0;
    spec.samples_std = 5.0;
    let ds = generate_synthetic(&spec)?;
    let mut rng = stream(13, 0, 0);
    let mlr = MlrModel::new(5, 4, 0.01);
    let mlp = MlpModel::new(5, 6, 4).with_l2(1e-3);
    let (mut worst_mlr, mut worst_mlp) = (0.0f64, 0.0f64);
    for probe in 0..20 {
        let data = &ds.clients[probe % 2].train;
        let w: Vec<f64> = (0..mlr.param_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        worst_mlr = worst_mlr.max(fd_error(&mlr, &w, data, 1e-5)?);
        let w = mlp.init_params(&mut rng);
        worst_mlp = worst_mlp.max(fd_error(&mlp, &w, data, 1e-6)?);
    }
    Ok((
        worst_mlr < 1e-5 && worst_mlp < 1e-4,
        format!("relative error mlr {worst_mlr:.1e}, mlp {worst_mlp:.1e}"),
    ))
}

fn dfedu_equals_fedu() -> fedlap_core::Result<(bool, String)> {
    let mut spec = SyntheticSpec::new(6, 4, 3, 2);
    spec.samples_mean = 30.0;
    spec.samples_std = 5.0;
    let ds = split(&generate_synthetic(&spec)?, 0.75, 1)?;
    let models = vec![MlrModel::new(4, 3, 1e-3); 6];
    let g = ClientGraph::complete(6, 0.5)?;
    let mut cfg = TrainConfig::new(0.05, 3, 50, 0.3, 6, 5);
    cfg.seed = 14;
    let a = run_fedu(&g, &models, &ds.clients, &cfg)?;
    cfg.mode = Mode::Decentralized;
    let b = run_dfedu(&g, &models, &ds.clients, &cfg)?;
    let same = a.objectives().iter().zip(b.objectives()).all(|(x, y)| x.to_bits() == y.to_bits())
        && a.final_params == b.final_params;
    Ok((same, format!("{} recorded rounds, bitwise {}", a.records.len(), if same { "equal" } else { "different" })))
}
