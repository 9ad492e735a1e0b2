//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the terminal; exits non-zero when any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fedlap_cli::{sweep_eta, RunSpec};
use fedlap_core::analysis::{
    check_lemma1, convergence_metrics, quadratic_fixed_point, solve_quadratic_optimum, Optimum,
};
use fedlap_core::data::{data_free_clients, generate_synthetic, split, SyntheticSpec};
use fedlap_core::engine::{matrix_form_step, objective, run_fedu_from, sample_clients, server_regularize};
use fedlap_core::rng::stream;
use fedlap_core::{
    run_dfedu, run_fedu, ClientDataset, ClientGraph, LossModel, MlpModel, MlrModel, Mode, QuadraticModel, StackedParams,
    TrainConfig,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome, u64);

fn rng(seed: u64) -> ChaCha8Rng {
    stream(seed, 0, 0)
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn mlr_instance(n: usize, seed: u64) -> (Vec<ClientDataset>, Vec<MlrModel>) {
    let mut spec = SyntheticSpec::new(n, 5, 4, 2);
    spec.samples_mean = 40.0;
    spec.samples_std = 10.0;
    spec.seed = seed;
    let ds = split(&generate_synthetic(&spec).unwrap(), 0.75, seed).unwrap();
    (ds.clients, vec![MlrModel::new(5, 4, 1e-3); n])
}

fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> ClientGraph {
    let mut edges = Vec::new();
    for k in 0..n {
        for l in k + 1..n {
            if rng.random_bool(p) {
                edges.push((k, l, 1.0 - rng.random::<f64>()));
            }
        }
    }
    ClientGraph::build(n, &edges).unwrap()
}

fn random_params(n: usize, d: usize, rng: &mut ChaCha8Rng) -> StackedParams {
    StackedParams::new((0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect()).unwrap()
}

fn matrix_form_oracle() -> Outcome {
    let mut rng = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=10);
        let d = rng.random_range(1..=5);
        let p = rng.random_range(0.1..1.0);
        let g = random_graph(n, p, &mut rng);
        let s = rng.random_range(1..=n);
        let sampled = sample_clients(n, s, &mut rng).unwrap();
        let w_t = random_params(n, d, &mut rng);
        let mut w_r = w_t.clone();
        for &k in &sampled {
            *w_r.block_mut(k) = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        }
        let eta = rng.random_range(0.0..2.0);
        let glr = rng.random_range(0.0..0.5);
        let a = server_regularize(&w_r, &sampled, &g, eta, glr).unwrap();
        let b = matrix_form_step(&w_t, &w_r, &sampled, &g, eta, glr).unwrap();
        worst = worst.max(a.max_abs_diff(&b));
    }
    (worst <= 1e-12, format!("max coordinate gap {worst:.2e} over 50 rounds"))
}

fn quadratic_closed_form() -> Outcome {
    let g = ClientGraph::build(2, &[(0, 1, 1.0)]).unwrap();
    let centers = vec![vec![0.0], vec![4.0]];
    let models: Vec<QuadraticModel> = centers.iter().map(|c| QuadraticModel::unit(c.clone())).collect();
    let data = data_free_clients(2);
    let (mu, r, eta) = (0.05, 5, 0.5);
    let mut cfg = TrainConfig::new(mu, r, 2000, eta, 2, 1);
    cfg.keep_iterates = true;
    assert!(cfg.step_size_valid(&g));
    let w_star = solve_quadratic_optimum(&g, &centers, &[1.0, 1.0], eta).unwrap();
    let j_star = objective(&g, &models, &data, &w_star, eta).unwrap();
    let h = run_fedu_from(&g, &models, &data, &cfg, StackedParams::zeros(2, 1)).unwrap();
    let summary = convergence_metrics(&h, Some(&Optimum { params: w_star.clone(), objective: j_star }), 1e-6);
    let best = summary.distances.iter().copied().fold(f64::INFINITY, f64::min);
    let rate = summary.decay_rate.unwrap_or(f64::NAN);
    let limit = quadratic_fixed_point(&g, &centers, &[1.0, 1.0], eta, mu, r).unwrap();
    let reached = summary.rounds_to_tol_distance.is_some();
    (
        reached && rate < 1.0,
        format!(
            "min ||W - W*|| = {best:.3e} (needs 1e-6), tail rate {rate:.6}; iterates settle at ({:.6}, {:.6}), {:.3e} from W* = (1, 3)",
            limit.block(0)[0],
            limit.block(1)[0],
            limit.distance(&w_star)
        ),
    )
}

fn dfedu_matches_fedu() -> Outcome {
    let (data, models) = mlr_instance(10, 5);
    let g = ClientGraph::complete(10, 0.3).unwrap();
    let mut cfg = TrainConfig::new(0.05, 5, 200, 0.1, 10, 20);
    cfg.seed = 8;
    let a = run_fedu(&g, &models, &data, &cfg).unwrap();
    cfg.mode = Mode::Decentralized;
    let b = run_dfedu(&g, &models, &data, &cfg).unwrap();
    let diverging = a
        .objectives()
        .iter()
        .zip(b.objectives())
        .position(|(x, y)| x.to_bits() != y.to_bits());
    let rows = a.records.len();
    match diverging {
        None if rows == 201 && a.final_params == b.final_params => (true, format!("{rows} objectives bitwise equal")),
        None => (false, format!("{rows} records, parameters differ")),
        Some(t) => (false, format!("first difference at record {t}")),
    }
}

fn fd_error<M: LossModel>(model: &M, w: &[f64], data: &fedlap_core::Samples, h: f64) -> f64 {
    let g = model.grad(w, data).unwrap();
    let mut probe = w.to_vec();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..w.len() {
        probe[i] = w[i] + h;
        let up = model.loss(&probe, data).unwrap();
        probe[i] = w[i] - h;
        let down = model.loss(&probe, data).unwrap();
        probe[i] = w[i];
        let fd = (up - down) / (2.0 * h);
        num += (g[i] - fd).powi(2);
        den += g[i].powi(2).max(fd * fd);
    }
    num.sqrt() / den.sqrt().max(1e-12)
}

fn gradient_checks() -> Outcome {
    let (data, _) = mlr_instance(4, 6);
    let mlr = MlrModel::new(5, 4, 0.01);
    let mlp = MlpModel::new(5, 8, 4).with_l2(1e-3);
    let mut rng = rng(2);
    let (mut e_mlr, mut e_mlp) = (0.0f64, 0.0f64);
    for probe in 0..20 {
        let d = &data[probe % 4].train;
        let w: Vec<f64> = (0..mlr.param_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        e_mlr = e_mlr.max(fd_error(&mlr, &w, d, 1e-5));
        let w = mlp.init_params(&mut rng);
        e_mlp = e_mlp.max(fd_error(&mlp, &w, d, 1e-6));
    }
    (
        e_mlr < 1e-5 && e_mlp < 1e-4,
        format!("worst relative error mlr {e_mlr:.2e} (< 1e-5), mlp {e_mlp:.2e} (< 1e-4)"),
    )
}

fn lemma_one() -> Outcome {
    let g = ClientGraph::build(2, &[(0, 1, 1.0)]).unwrap();
    let models = vec![QuadraticModel::unit(vec![0.0]), QuadraticModel::unit(vec![4.0])];
    let eta = 2.0;
    let report = check_lemma1(&models, &data_free_clients(2), &g, eta, 1000, &mut rng(3)).unwrap();
    let formula = 16.0 * eta * report.rho / (eta * report.rho - 2.0);
    let exact = report.sigma2_squared.to_bits() == formula.to_bits();
    let near_32 = (report.sigma2_squared - 32.0).abs() <= 32.0 * 1e-12;
    let mut violations = report.violations;
    let mut trials = report.n_trials;
    let mut r = rng(4);
    for _ in 0..5 {
        let n = r.random_range(2..=8);
        let g = ClientGraph::complete(n, r.random_range(0.2..1.0)).unwrap();
        let beta = r.random_range(0.5..2.0);
        let models: Vec<QuadraticModel> = (0..n)
            .map(|_| QuadraticModel::new(vec![r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)], beta))
            .collect();
        let eta = 2.0 * beta / g.rho() * r.random_range(1.05..4.0);
        let rep = check_lemma1(&models, &data_free_clients(n), &g, eta, 1000, &mut r).unwrap();
        violations += rep.violations;
        trials += rep.n_trials;
    }
    // unequal curvatures satisfy the hypotheses but break the bound; reported, not gated
    let hetero = vec![QuadraticModel::unit(vec![0.0]), QuadraticModel::new(vec![0.0], 0.0)];
    let het = check_lemma1(&hetero, &data_free_clients(2), &g, eta, 1000, &mut rng(5)).unwrap();
    (
        exact && near_32 && violations == 0,
        format!(
            "sigma2^2 = {} (formula bitwise {}), {violations} violations in {trials} trials; \
             unequal-curvature instance: {} violations, max {:.3}",
            report.sigma2_squared,
            if exact { "equal" } else { "different" },
            het.violations,
            het.max_violation
        ),
    )
}

fn consensus_limit() -> Outcome {
    let mut r = rng(5);
    let n = 8;
    let g = random_graph(n, 0.5, &mut r);
    let g = if g.is_connected() { g } else { ClientGraph::ring(n, 1.0).unwrap() };
    let centers: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| r.random_range(-5.0..5.0)).collect()).collect();
    let curv = vec![1.0; n];
    let scale = StackedParams::new(centers.clone()).unwrap();
    let scale = (0..n)
        .flat_map(|k| (0..n).map(move |l| (k, l)))
        .map(|(k, l)| scale.block(k).iter().zip(scale.block(l)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut last = f64::INFINITY;
    let mut monotone = true;
    let mut spread = Vec::new();
    for eta in [0.0, 0.1, 1.0, 10.0, 1e3, 1e6] {
        let w = solve_quadratic_optimum(&g, &centers, &curv, eta).unwrap();
        let d = (0..n)
            .flat_map(|k| (0..n).map(move |l| (k, l)))
            .map(|(k, l)| w.block(k).iter().zip(w.block(l)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        monotone &= d <= last;
        last = d;
        spread.push(d / scale);
    }
    (
        monotone && last / scale < 1e-4,
        format!(
            "relative max pairwise gap over eta grid: {}",
            spread.iter().map(|s| format!("{s:.1e}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn sampling_and_staleness() -> Outcome {
    // a correct sampler exceeds ±0.01 on some client for about 8% of seeds;
    // the χ² statistic (≈ 89 expected for 99 df without replacement) is
    // reported as the seed-independent view
    let mut r = rng(0);
    let mut counts = [0usize; 100];
    for _ in 0..10_000 {
        for k in sample_clients(100, 10, &mut r).unwrap() {
            counts[k] += 1;
        }
    }
    let worst = counts.iter().map(|&c| (c as f64 / 1e4 - 0.1).abs()).fold(0.0, f64::max);
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - 1000.0).powi(2) / 1000.0).sum();
    let (data, models) = mlr_instance(8, 7);
    let g = ClientGraph::complete(8, 0.5).unwrap();
    let mut cfg = TrainConfig::new(0.05, 3, 50, 0.5, 3, 10);
    cfg.keep_iterates = true;
    let h = run_fedu(&g, &models, &data, &cfg).unwrap();
    let mut stale_ok = true;
    for t in 0..cfg.rounds {
        let sampled = &h.records[t + 1].sampled;
        for k in (0..8).filter(|k| !sampled.contains(k)) {
            stale_ok &= h.iterates[t + 1].block(k) == h.iterates[t].block(k);
        }
    }
    (
        worst <= 0.01 && stale_ok,
        format!(
            "max |freq - 0.1| = {worst:.4}, chi2 = {chi2:.1}; non-sampled clients {} over 50 rounds",
            if stale_ok { "bit-identical" } else { "changed" }
        ),
    )
}

fn cutoff_sweep() -> Outcome {
    let spec = RunSpec::load(&workspace_root().join("configs/cutoff_sweep.json")).unwrap();
    let etas = [1e-3, 1e-2, 1e-1, 1.0];
    let rows = sweep_eta(&spec, &etas, 10).unwrap();
    let (mut beats_local, mut degrades) = (0, 0);
    for repeat in 0..10 {
        let of = |setting: &str, eta: Option<f64>| {
            rows.iter()
                .find(|r| r.repeat == repeat && r.setting == setting && r.eta == eta)
                .unwrap()
                .cut_client_test_acc
        };
        let fed: Vec<f64> = etas.iter().map(|&e| of("fedu", Some(e))).collect();
        let best = fed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        beats_local += usize::from(best > of("local", Some(0.0)));
        degrades += usize::from(fed[3] < best);
    }
    (
        beats_local >= 8 && degrades >= 6,
        format!("best eta beats Local in {beats_local}/10 (needs 8); eta = 1 below best in {degrades}/10 (needs 6)"),
    )
}

fn linear_speedup() -> Outcome {
    let n = 16;
    let mut r = rng(9);
    let models: Vec<QuadraticModel> = (0..n).map(|_| QuadraticModel::unit(vec![r.random_range(-1.0..1.0)])).collect();
    let g = ClientGraph::complete(n, 0.05).unwrap();
    let data = data_free_clients(n);
    let eta = 1.0;
    let w_star = fedlap_core::analysis::solve_quadratic_models(&g, &models, eta).unwrap();
    let optimum = Optimum {
        objective: objective(&g, &models, &data, &w_star, eta).unwrap(),
        params: w_star,
    };
    let mean_rounds = |s: usize| -> Option<f64> {
        let mut total = 0.0;
        for seed in 0..20 {
            let mut cfg = TrainConfig::new(5e-4, 5, 4000, eta, s, 1);
            cfg.seed = seed;
            cfg.eval_every = Some(1);
            let h = run_fedu_from(&g, &models, &data, &cfg, StackedParams::zeros(n, 1)).unwrap();
            total += convergence_metrics(&h, Some(&optimum), 1e-4).rounds_to_tol_gap? as f64;
        }
        Some(total / 20.0)
    };
    match (mean_rounds(8), mean_rounds(16)) {
        (Some(half), Some(full)) => {
            let factor = half / full;
            (
                (1.5..=2.5).contains(&factor),
                format!("rounds to gap 1e-4: S=8 {half:.1}, S=16 {full:.1}, factor {factor:.3}"),
            )
        }
        _ => (false, "tolerance not reached within 4000 rounds".into()),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(workspace_root().join("configs/mlr_random_weights.json")).unwrap()).unwrap();
    spec["train"]["sample_size"] = serde_json::json!(10);
    spec["output_dir"] = serde_json::json!("out");
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, spec.to_string()).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2", "4", "1"] {
        let status = Command::new(env!("CARGO_BIN_EXE_fedlap"))
            .env_remove("FEDLAP_SEED")
            .args(["run", "--threads", threads])
            .arg(&cfg)
            .status()
            .unwrap();
        if !status.success() {
            return (false, format!("run with {threads} threads failed: {status}"));
        }
        outputs.push(std::fs::read(dir.path().join("out/history.csv")).unwrap());
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    (
        same,
        format!(
            "history.csv ({} bytes) {} across 1, 2, 4, 1 threads",
            outputs[0].len(),
            if same { "byte-identical" } else { "differs" }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("matrix-form oracle equivalence", matrix_form_oracle, 5),
        ("quadratic closed-form convergence", quadratic_closed_form, 5),
        ("dFedU equals FedU at S = N", dfedu_matches_fedu, 30),
        ("gradient correctness", gradient_checks, 10),
        ("bounded-gradient lemma", lemma_one, 5),
        ("consensus limit", consensus_limit, 5),
        ("sampling uniformity and stale clients", sampling_and_staleness, 10),
        ("cut-off eta-sweep trend", cutoff_sweep, 300),
        ("linear speedup in S", linear_speedup, 60),
        ("determinism across thread counts", determinism, 120),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let pass = ok && in_time;
        failed += usize::from(!pass);
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.2?}{}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed,
            if in_time { String::new() } else { format!(" over {budget}s budget") }
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
