//! JSON run configuration. Unknown keys are rejected; relative paths resolve
//! against the directory holding the config file.

use std::path::{Path, PathBuf};

use fedlap_core::data::SyntheticSpec;
use fedlap_core::{TrainConfig, WeightScenario};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Required for `mlr` and `mlp`; quadratic clients are data-free.
    #[serde(default)]
    pub dataset: Option<DatasetSpec>,
    pub graph: GraphSpec,
    pub model: ModelSpec,
    pub train: TrainConfig,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub source: DataSource,
    /// Applied when no client has test rows yet.
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub cutoff: Option<CutoffSpec>,
}

fn default_train_fraction() -> f64 {
    0.75
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    Csv(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    #[serde(default = "half")]
    pub fraction_of_clients: f64,
    #[serde(default = "tenth")]
    pub keep_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub topology: Topology,
    /// Reweights the topology's edges; omitted keeps the generated weights.
    #[serde(default)]
    pub weights: Option<WeightsSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Topology {
    Complete {
        #[serde(default = "one")]
        weight: f64,
    },
    Ring {
        #[serde(default = "one")]
        weight: f64,
    },
    Random {
        p: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsSpec {
    Random,
    Equal(f64),
    Weighted {
        small_set: Vec<usize>,
        #[serde(default)]
        c_small: f64,
        #[serde(default = "half")]
        c_mixed: f64,
        #[serde(default = "one")]
        c_full: f64,
    },
    /// Shared-label weights computed from the dataset's label sets.
    SimilarLabels,
}

impl WeightsSpec {
    pub fn scenario(&self, label_sets: Option<Vec<Vec<usize>>>) -> Result<WeightScenario, CliError> {
        Ok(match self {
            WeightsSpec::Random => WeightScenario::Random,
            &WeightsSpec::Equal(c) => WeightScenario::Equal(c),
            WeightsSpec::Weighted {
                small_set,
                c_small,
                c_mixed,
                c_full,
            } => WeightScenario::Weighted {
                small_set: small_set.clone(),
                c_small: *c_small,
                c_mixed: *c_mixed,
                c_full: *c_full,
            },
            WeightsSpec::SimilarLabels => WeightScenario::Similar(
                label_sets.ok_or_else(|| CliError::Config("similar_labels weights need a dataset".into()))?,
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// One center per client; the client count follows `centers`.
    Quadratic {
        centers: Vec<Vec<f64>>,
        #[serde(default = "one")]
        curvature: f64,
    },
    Mlr {
        #[serde(default)]
        l2: f64,
    },
    Mlp {
        #[serde(default = "default_hidden")]
        hidden: usize,
        #[serde(default)]
        l2: f64,
    },
}

impl ModelSpec {
    pub fn is_classifier(&self) -> bool {
        !matches!(self, ModelSpec::Quadratic { .. })
    }
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn tenth() -> f64 {
    0.1
}

fn default_hidden() -> usize {
    20
}

impl RunSpec {
    /// Reads, resolves and validates a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut spec: RunSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        spec.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        spec.validate()?;
        Ok(spec)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(DatasetSpec {
            source: DataSource::Csv(p), ..
        }) = &mut self.dataset
        {
            fix(p);
        }
        if let Topology::File(p) = &mut self.graph.topology {
            fix(p);
        }
        fix(&mut self.output_dir);
    }

    /// Range checks and existence of referenced files.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        match (&self.model, &self.dataset) {
            (ModelSpec::Quadratic { centers, curvature }, _) => {
                if centers.is_empty() {
                    return bad("quadratic model needs at least one center".into());
                }
                if centers.iter().any(|c| c.len() != centers[0].len()) {
                    return bad("quadratic centers must share one dimension".into());
                }
                if !(*curvature >= 0.0) {
                    return bad(format!("curvature must be non-negative, got {curvature}"));
                }
            }
            (_, None) => return bad("mlr and mlp models need a dataset".into()),
            (ModelSpec::Mlp { hidden: 0, .. }, _) => return bad("mlp hidden width must be positive".into()),
            _ => {}
        }
        if let ModelSpec::Mlr { l2 } | ModelSpec::Mlp { l2, .. } = self.model {
            if !(l2 >= 0.0) {
                return bad(format!("l2 must be non-negative, got {l2}"));
            }
        }
        if let Some(ds) = &self.dataset {
            if !(ds.train_fraction > 0.0 && ds.train_fraction < 1.0) {
                return bad(format!("train_fraction {} not in (0, 1)", ds.train_fraction));
            }
            if let DataSource::Csv(p) = &ds.source {
                if !p.is_file() {
                    return bad(format!("dataset file not found: {}", p.display()));
                }
            }
            if let Some(c) = ds.cutoff {
                if !(c.fraction_of_clients > 0.0 && c.fraction_of_clients <= 1.0) {
                    return bad(format!("cutoff.fraction_of_clients {} not in (0, 1]", c.fraction_of_clients));
                }
                if !(c.keep_fraction > 0.0 && c.keep_fraction < 1.0) {
                    return bad(format!("cutoff.keep_fraction {} not in (0, 1)", c.keep_fraction));
                }
            }
        }
        match &self.graph.topology {
            Topology::File(p) if !p.is_file() => return bad(format!("graph file not found: {}", p.display())),
            Topology::Random { p, .. } if !(0.0..=1.0).contains(p) => {
                return bad(format!("random graph p = {p} not in [0, 1]"))
            }
            Topology::Complete { weight } | Topology::Ring { weight } | Topology::Random { weight, .. }
                if !(*weight >= 0.0) =>
            {
                return bad(format!("edge weight must be non-negative, got {weight}"))
            }
            _ => {}
        }
        if self.train.avg_alpha.is_some() && !self.train.keep_iterates {
            return bad("train.avg_alpha requires train.keep_iterates".into());
        }
        Ok(())
    }
}
