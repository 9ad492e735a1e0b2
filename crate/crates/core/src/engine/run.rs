use std::time::Instant;

use rayon::prelude::*;

use super::config::{Mode, TrainConfig};
use super::history::{RoundRecord, RunHistory};
use super::local::{local_update, LocalOutcome};
use super::sampling::sample_clients;
use super::server::{regularize_client, server_regularize_with, NeighborRule};
use crate::data::ClientDataset;
use crate::error::{Error, Result};
use crate::graph::ClientGraph;
use crate::models::LossModel;
use crate::params::StackedParams;
use crate::rng;

/// `J(W) = Σ_k F_k(w_k) + (η/2) · Wᵀ(L⊗I)W`.
///
/// Halving the Laplacian form makes `∇J = ∇F + η(L⊗I)W`, the direction the
/// server step actually follows.
pub fn objective<M: LossModel>(graph: &ClientGraph, models: &[M], data: &[ClientDataset], w: &StackedParams, eta: f64) -> Result<f64> {
    let mut total = 0.0;
    for (k, (m, c)) in models.iter().zip(data).enumerate() {
        total += m.loss(w.block(k), &c.train)?;
    }
    Ok(total + 0.5 * eta * graph.laplacian_quadratic(w)?)
}

/// Initial parameters: every client draws from the same setup stream, so
/// clients with identical models start from identical parameters.
fn initial_params<M: LossModel>(models: &[M], seed: u64) -> Result<StackedParams> {
    StackedParams::new(
        models
            .iter()
            .map(|m| m.init_params(&mut rng::stream(seed, rng::SETUP_ROUND, 1)))
            .collect(),
    )
}

/// FedU from model-provided initial parameters.
pub fn run_fedu<M: LossModel + Sync>(graph: &ClientGraph, models: &[M], data: &[ClientDataset], config: &TrainConfig) -> Result<RunHistory> {
    run_fedu_from(graph, models, data, config, initial_params(models, config.seed)?)
}

pub fn run_fedu_from<M: LossModel + Sync>(
    graph: &ClientGraph,
    models: &[M],
    data: &[ClientDataset],
    config: &TrainConfig,
    init: StackedParams,
) -> Result<RunHistory> {
    if config.mode != Mode::Centralized {
        return Err(Error::InvalidConfig("run_fedu needs mode = centralized".into()));
    }
    simulate(graph, models, data, config, init)
}

/// dFedU from model-provided initial parameters.
pub fn run_dfedu<M: LossModel + Sync>(graph: &ClientGraph, models: &[M], data: &[ClientDataset], config: &TrainConfig) -> Result<RunHistory> {
    run_dfedu_from(graph, models, data, config, initial_params(models, config.seed)?)
}

pub fn run_dfedu_from<M: LossModel + Sync>(
    graph: &ClientGraph,
    models: &[M],
    data: &[ClientDataset],
    config: &TrainConfig,
    init: StackedParams,
) -> Result<RunHistory> {
    if config.mode != Mode::Decentralized {
        return Err(Error::InvalidConfig("run_dfedu needs mode = decentralized".into()));
    }
    simulate(graph, models, data, config, init)
}

/// Dispatches on `config.mode`.
pub fn run<M: LossModel + Sync>(graph: &ClientGraph, models: &[M], data: &[ClientDataset], config: &TrainConfig) -> Result<RunHistory> {
    let init = initial_params(models, config.seed)?;
    simulate(graph, models, data, config, init)
}

fn simulate<M: LossModel + Sync>(
    graph: &ClientGraph,
    models: &[M],
    data: &[ClientDataset],
    config: &TrainConfig,
    init: StackedParams,
) -> Result<RunHistory> {
    let started = Instant::now();
    let n = graph.n_clients();
    config.validate(n)?;
    for len in [models.len(), data.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    init.check_shape(n)?;
    if let Some(bad) = models.iter().find(|m| m.param_dim() != init.dim()) {
        return Err(Error::DimensionMismatch {
            expected: init.dim(),
            got: bad.param_dim(),
        });
    }
    let step_size_valid = config.step_size_valid(graph);
    if !step_size_valid {
        log::warn!(
            "global_lr * eta * rho = {:.4} exceeds 2; the server update is expansive",
            config.global_lr() * config.eta * graph.rho()
        );
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;

    let sim = Simulation {
        graph,
        models,
        data,
        config,
    };
    let cadence = config.eval_cadence();
    let mut w = init;
    let mut records = vec![pool.install(|| sim.evaluate(0, &w, 0.0, Vec::new()))?];
    let mut iterates = Vec::new();
    if config.keep_iterates {
        iterates.push(w.clone());
    }
    let mut last_objective = records[0].objective;

    for t in 0..config.rounds {
        let active: Vec<usize> = match config.mode {
            Mode::Centralized => sample_clients(n, config.sample_size, &mut rng::server_rng(config.seed, t))?,
            Mode::Decentralized => (0..n).collect(),
        };
        let outcomes: Vec<(usize, Result<LocalOutcome>)> = pool.install(|| {
            active
                .par_iter()
                .map(|&k| {
                    let mut client_rng = rng::client_rng(config.seed, k, t);
                    let out = local_update(
                        &models[k],
                        w.block(k),
                        config.local_steps,
                        config.local_lr,
                        config.batch_size,
                        &data[k].train,
                        &mut client_rng,
                    );
                    (k, out)
                })
                .collect()
        });
        let mut w_r = w.clone();
        let mut drift = 0.0;
        for (k, out) in outcomes {
            let out = out.map_err(|e| match e {
                Error::NonFiniteParameter { .. } => Error::NonFiniteParameter {
                    round: t,
                    client: k,
                    last_objective,
                },
                other => other,
            })?;
            drift += out.drift();
            *w_r.block_mut(k) = out.params;
        }
        drift /= active.len() as f64;

        let next = match config.mode {
            Mode::Centralized => {
                let rule = if config.sampled_neighbors_only {
                    NeighborRule::SampledOnly
                } else {
                    NeighborRule::AllStale
                };
                server_regularize_with(&w_r, &active, graph, config.eta, config.global_lr(), rule)?
            }
            Mode::Decentralized => exchange_with_neighbors(graph, &w_r, config.eta * config.global_lr())?,
        };
        if let Some(k) = (0..n).find(|&k| next.block(k).iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFiniteParameter {
                round: t,
                client: k,
                last_objective,
            });
        }
        w = next;
        if config.keep_iterates {
            iterates.push(w.clone());
        }
        let round = t + 1;
        if round % cadence == 0 || round == config.rounds {
            let record = pool.install(|| sim.evaluate(round, &w, drift, active))?;
            last_objective = record.objective;
            records.push(record);
        }
    }

    Ok(RunHistory {
        records,
        iterates,
        final_params: w,
        step_size_valid,
        wall_time: started.elapsed(),
    })
}

/// One dFedU communication step: each client sends `w_{k,R}` to its
/// neighbors, then corrects using what it received, in sender order.
fn exchange_with_neighbors(graph: &ClientGraph, w_r: &StackedParams, coef: f64) -> Result<StackedParams> {
    let n = graph.n_clients();
    let mut inboxes: Vec<Vec<(usize, &[f64])>> = vec![Vec::new(); n];
    for k in 0..n {
        for &(l, _) in graph.neighbors(k) {
            inboxes[l].push((k, w_r.block(k)));
        }
    }
    let blocks = inboxes
        .into_iter()
        .enumerate()
        .map(|(k, mut inbox)| {
            inbox.sort_by_key(|&(sender, _)| sender);
            let msgs = inbox.into_iter().map(|(sender, w)| (graph.weight(k, sender), w));
            regularize_client(w_r.block(k), msgs, coef)
        })
        .collect();
    StackedParams::new(blocks)
}

struct Simulation<'a, M> {
    graph: &'a ClientGraph,
    models: &'a [M],
    data: &'a [ClientDataset],
    config: &'a TrainConfig,
}

impl<M: LossModel + Sync> Simulation<'_, M> {
    fn evaluate(&self, round: usize, w: &StackedParams, drift: f64, sampled: Vec<usize>) -> Result<RoundRecord> {
        let per_client: Vec<Result<(f64, Option<f64>)>> = (0..self.models.len())
            .into_par_iter()
            .map(|k| {
                let m = &self.models[k];
                let loss = m.loss(w.block(k), &self.data[k].train)?;
                Ok((loss, m.accuracy(w.block(k), &self.data[k].test)))
            })
            .collect();
        let mut train_loss = Vec::with_capacity(per_client.len());
        let mut test_accuracy = Vec::with_capacity(per_client.len());
        for r in per_client {
            let (l, a) = r?;
            train_loss.push(l);
            test_accuracy.push(a);
        }
        let objective = train_loss.iter().sum::<f64>() + 0.5 * self.config.eta * self.graph.laplacian_quadratic(w)?;
        Ok(RoundRecord {
            round,
            objective,
            train_loss,
            test_accuracy,
            drift,
            disagreement: self.graph.disagreement(w),
            sampled,
        })
    }
}
