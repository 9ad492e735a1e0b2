use std::fs;
use std::path::Path;

use fedlap_core::engine::{objective, run, weighted_average};
use fedlap_core::rng::{stream, SETUP_ROUND};
use fedlap_core::data::save_csv;
use fedlap_core::engine::local_update;
use fedlap_core::{LossModel, RunHistory};
use serde::Serialize;

use crate::config::RunSpec;
use crate::error::CliError;
use crate::experiment::{build, Experiment};

const GLOBAL_SLOT: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub rounds: usize,
    pub seed: u64,
    pub n_clients: usize,
    pub final_objective: f64,
    pub final_mean_train_loss: f64,
    /// `None` for models without accuracy.
    pub final_mean_test_acc: Option<f64>,
    pub cut_clients: Vec<usize>,
    pub final_cut_client_test_acc: Option<f64>,
    pub step_size_valid: bool,
    /// Objective at the θ-weighted average iterate, when `avg_alpha` is set.
    pub averaged_objective: Option<f64>,
}

pub struct RunOutcome {
    pub history: RunHistory,
    pub summary: RunSummary,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// One engine run on a built experiment.
pub fn execute(exp: &Experiment) -> Result<RunOutcome, CliError> {
    let history = run(&exp.graph, &exp.models, &exp.data, &exp.config)?;
    let last = history.last();
    let averaged_objective = match exp.config.avg_alpha {
        Some(alpha) if history.iterates.len() > 1 => {
            let n = exp.graph.n_clients();
            let cfg = &exp.config;
            let sample = match cfg.mode {
                fedlap_core::Mode::Centralized => cfg.sample_size,
                fedlap_core::Mode::Decentralized => n,
            };
            let avg = weighted_average(&history.iterates[..history.iterates.len() - 1], cfg.local_lr, cfg.local_steps, sample, n, alpha)?;
            Some(objective(&exp.graph, &exp.models, &exp.data, &avg, cfg.eta)?)
        }
        _ => None,
    };
    let summary = RunSummary {
        rounds: exp.config.rounds,
        seed: exp.config.seed,
        n_clients: exp.graph.n_clients(),
        final_objective: last.objective,
        final_mean_train_loss: last.mean_train_loss(),
        final_mean_test_acc: finite(last.mean_test_accuracy()),
        cut_clients: exp.cut_clients().to_vec(),
        final_cut_client_test_acc: finite(last.mean_test_accuracy_of(exp.cut_clients())),
        step_size_valid: history.step_size_valid,
        averaged_objective,
    };
    Ok(RunOutcome { history, summary })
}

pub fn write_history(history: &RunHistory, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["round", "objective", "mean_train_loss", "mean_test_acc", "drift", "disagreement"])
        .map_err(csv_err)?;
    for r in &history.records {
        w.write_record([
            r.round.to_string(),
            r.objective.to_string(),
            r.mean_train_loss().to_string(),
            r.mean_test_accuracy().to_string(),
            r.drift.to_string(),
            r.disagreement.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Core(e.into())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Core(e.into()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// `fedlap run`: writes `history.csv` and `summary.json` to the output directory.
pub fn cmd_run(spec: &RunSpec) -> Result<RunSummary, CliError> {
    let exp = build(spec, 0)?;
    let out = execute(&exp)?;
    fs::create_dir_all(&spec.output_dir)?;
    write_history(&out.history, &spec.output_dir.join("history.csv"))?;
    write_json(&out.summary, &spec.output_dir.join("summary.json"))?;
    log::info!(
        "{} rounds in {:.2?}; final objective {}",
        exp.config.rounds,
        out.history.wall_time,
        out.summary.final_objective
    );
    Ok(out.summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// `fedu`, `local` or `global`.
    pub setting: String,
    /// `None` for the global baseline.
    pub eta: Option<f64>,
    pub repeat: u64,
    pub seed: u64,
    pub mean_test_acc: f64,
    pub cut_client_test_acc: f64,
}

/// Runs every `η` in `etas` plus the Local (`η = 0`) and Global baselines,
/// for seeds `seed, seed + 1, …, seed + repeats − 1`.
pub fn sweep_eta(spec: &RunSpec, etas: &[f64], repeats: u64) -> Result<Vec<SweepRow>, CliError> {
    if etas.is_empty() {
        return Err(CliError::Config("sweep needs at least one eta".into()));
    }
    if let Some(bad) = etas.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
        return Err(CliError::Config(format!("eta must be non-negative, got {bad}")));
    }
    if !spec.model.is_classifier() {
        return Err(CliError::Config("sweep-eta reports accuracy and needs an mlr or mlp model".into()));
    }
    let mut rows = Vec::new();
    for repeat in 0..repeats.max(1) {
        let base = build(spec, repeat)?;
        let settings = etas.iter().map(|&e| ("fedu", e)).chain([("local", 0.0)]);
        for (name, eta) in settings {
            let mut exp = base.clone();
            exp.config.eta = eta;
            let out = execute(&exp)?;
            let last = out.history.last();
            rows.push(SweepRow {
                setting: name.into(),
                eta: Some(eta),
                repeat,
                seed: exp.config.seed,
                mean_test_acc: last.mean_test_accuracy(),
                cut_client_test_acc: last.mean_test_accuracy_of(exp.cut_clients()),
            });
        }
        let (mean, cut) = global_baseline(&base)?;
        rows.push(SweepRow {
            setting: "global".into(),
            eta: None,
            repeat,
            seed: base.config.seed,
            mean_test_acc: mean,
            cut_client_test_acc: cut,
        });
    }
    Ok(rows)
}

/// One model trained by plain SGD on the pooled client data with the same
/// `μ` and `B` for `T · R` steps, then scored on every client's test set.
/// Returns mean accuracy over all clients and over the cut clients.
pub fn global_baseline(exp: &Experiment) -> Result<(f64, f64), CliError> {
    let ds = exp
        .dataset
        .as_ref()
        .ok_or_else(|| CliError::Config("global baseline needs a dataset".into()))?;
    let model = &exp.models[0];
    let pooled = ds.pooled_train();
    let cfg = &exp.config;
    let mut init_rng = stream(cfg.seed, SETUP_ROUND, 1);
    let start = model.init_params(&mut init_rng);
    let steps = cfg.rounds * cfg.local_steps;
    let w = if steps == 0 {
        start
    } else {
        let mut rng = stream(cfg.seed, SETUP_ROUND, GLOBAL_SLOT);
        local_update(model, &start, steps, cfg.local_lr, cfg.batch_size, &pooled, &mut rng)
            .map_err(CliError::from)?
            .params
    };
    let acc: Vec<f64> = ds
        .clients
        .iter()
        .map(|c| model.accuracy(&w, &c.test).unwrap_or(f64::NAN))
        .collect();
    let mean = |ks: &mut dyn Iterator<Item = usize>| {
        let (s, n) = ks.fold((0.0, 0usize), |(s, n), k| (s + acc[k], n + 1));
        if n == 0 {
            f64::NAN
        } else {
            s / n as f64
        }
    };
    Ok((mean(&mut (0..acc.len())), mean(&mut ds.cut_clients.iter().copied())))
}

/// `fedlap sweep-eta`: writes `sweep.csv` to the output directory.
pub fn cmd_sweep(spec: &RunSpec, etas: &[f64], repeats: u64) -> Result<Vec<SweepRow>, CliError> {
    let rows = sweep_eta(spec, etas, repeats)?;
    fs::create_dir_all(&spec.output_dir)?;
    let path = spec.output_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(["setting", "eta", "repeat", "seed", "mean_test_acc", "cut_client_test_acc"])
        .map_err(csv_err)?;
    for r in &rows {
        w.write_record([
            r.setting.clone(),
            r.eta.map_or_else(String::new, |e| e.to_string()),
            r.repeat.to_string(),
            r.seed.to_string(),
            r.mean_test_acc.to_string(),
            r.cut_client_test_acc.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(rows)
}

/// `fedlap gen-data`: writes `data.csv` (when the run has a dataset) and
/// `graph.json` to the output directory.
pub fn cmd_gen_data(spec: &RunSpec) -> Result<(), CliError> {
    let exp = build(spec, 0)?;
    fs::create_dir_all(&spec.output_dir)?;
    if let Some(ds) = &exp.dataset {
        save_csv(ds, spec.output_dir.join("data.csv"))?;
        let (mean, std) = ds.sample_stats();
        log::info!("{} clients, samples per client {mean:.1} ± {std:.1}", ds.n_clients());
    }
    fs::write(spec.output_dir.join("graph.json"), exp.graph.to_json() + "\n")?;
    Ok(())
}
