//! Turns a [`RunSpec`] into graph, models and client data.

use fedlap_core::data::{apply_cutoff, data_free_clients, generate_synthetic, load_csv, split};
use fedlap_core::rng::{stream, SETUP_ROUND};
use fedlap_core::{ClientDataset, ClientGraph, FederatedDataset, MlpModel, MlrModel, Model, QuadraticModel, TrainConfig};

use crate::config::{DataSource, ModelSpec, RunSpec, Topology};
use crate::error::CliError;

const GRAPH_SLOT: u64 = 2;
const WEIGHT_SLOT: u64 = 3;

pub const SEED_ENV: &str = "FEDLAP_SEED";

#[derive(Debug, Clone)]
pub struct Experiment {
    pub graph: ClientGraph,
    pub models: Vec<Model>,
    pub data: Vec<ClientDataset>,
    pub dataset: Option<FederatedDataset>,
    pub config: TrainConfig,
}

impl Experiment {
    pub fn cut_clients(&self) -> &[usize] {
        self.dataset.as_ref().map_or(&[], |d| &d.cut_clients)
    }
}

/// Replaces `train.seed` with `FEDLAP_SEED` when it is set.
pub fn apply_env_seed(spec: &mut RunSpec) -> Result<(), CliError> {
    if let Ok(raw) = std::env::var(SEED_ENV) {
        spec.train.seed = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={raw:?} is not an unsigned integer")))?;
    }
    Ok(())
}

/// Builds repeat `repeat` of the experiment: every seed (training, split,
/// cutoff, graph, weights, synthetic data) is offset by `repeat`.
pub fn build(spec: &RunSpec, repeat: u64) -> Result<Experiment, CliError> {
    let seed = spec.train.seed.wrapping_add(repeat);
    let dataset = spec.dataset.as_ref().map(|d| build_dataset(d, seed, repeat)).transpose()?;
    let (models, data) = match (&spec.model, &dataset) {
        (ModelSpec::Quadratic { centers, curvature }, _) => (
            centers
                .iter()
                .map(|c| Model::from(QuadraticModel::new(c.clone(), *curvature)))
                .collect::<Vec<_>>(),
            data_free_clients(centers.len()),
        ),
        (ModelSpec::Mlr { l2 }, Some(ds)) => (
            vec![Model::from(MlrModel::new(ds.n_features, ds.n_classes, *l2)); ds.n_clients()],
            ds.clients.clone(),
        ),
        (&ModelSpec::Mlp { hidden, l2 }, Some(ds)) => (
            vec![Model::from(MlpModel::new(ds.n_features, hidden, ds.n_classes).with_l2(l2)); ds.n_clients()],
            ds.clients.clone(),
        ),
        _ => return Err(CliError::Config("mlr and mlp models need a dataset".into())),
    };
    let n = models.len();
    let mut graph = match &spec.graph.topology {
        &Topology::Complete { weight } => ClientGraph::complete(n, weight)?,
        &Topology::Ring { weight } => ClientGraph::ring(n, weight)?,
        &Topology::Random { p, weight } => ClientGraph::random(n, p, weight, &mut stream(seed, SETUP_ROUND, GRAPH_SLOT))?,
        Topology::File(path) => ClientGraph::load(path).map_err(|e| CliError::Config(format!("graph file {}: {e}", path.display())))?,
    };
    if graph.n_clients() != n {
        return Err(CliError::Config(format!(
            "graph has {} vertices but the run has {n} clients",
            graph.n_clients()
        )));
    }
    if let Some(w) = &spec.graph.weights {
        let scenario = w.scenario(dataset.as_ref().map(|d| d.label_sets()))?;
        graph = graph.assign_weights(&scenario, &mut stream(seed, SETUP_ROUND, WEIGHT_SLOT))?;
    }
    let mut config = spec.train.clone();
    config.seed = seed;
    Ok(Experiment {
        graph,
        models,
        data,
        dataset,
        config,
    })
}

fn build_dataset(spec: &crate::config::DatasetSpec, seed: u64, repeat: u64) -> Result<FederatedDataset, CliError> {
    let mut ds = match &spec.source {
        DataSource::Synthetic(s) => {
            let mut s = s.clone();
            s.seed = s.seed.wrapping_add(repeat);
            generate_synthetic(&s)?
        }
        DataSource::Csv(path) => load_csv(path).map_err(|e| CliError::Config(format!("dataset {}: {e}", path.display())))?,
    };
    if ds.clients.iter().all(|c| c.test.is_empty()) {
        ds = split(&ds, spec.train_fraction, seed)?;
    }
    if let Some(c) = spec.cutoff {
        ds = apply_cutoff(&ds, c.fraction_of_clients, c.keep_fraction, seed)?;
    }
    ds.validate()?;
    Ok(ds)
}
