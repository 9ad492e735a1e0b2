//! Per-client labeled data: synthetic non-i.i.d. generation, train/test
//! splitting, the cut-off regime and a flat CSV bundle format.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Row-major feature matrix with one label per row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Samples {
    pub n_features: usize,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Samples {
    pub fn new(n_features: usize, features: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != n_features * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: n_features * labels.len(),
                got: features.len(),
            });
        }
        Ok(Samples {
            n_features,
            features,
            labels,
        })
    }

    pub fn empty(n_features: usize) -> Self {
        Samples {
            n_features,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn push(&mut self, row: &[f64], label: usize) {
        debug_assert_eq!(row.len(), self.n_features);
        self.features.extend_from_slice(row);
        self.labels.push(label);
    }

    pub fn subset(&self, idx: &[usize]) -> Samples {
        let mut out = Samples::empty(self.n_features);
        for &i in idx {
            out.push(self.row(i), self.labels[i]);
        }
        out
    }

    /// Concatenation of `self` and `other`.
    pub fn concat(&self, other: &Samples) -> Samples {
        let mut out = self.clone();
        out.features.extend_from_slice(&other.features);
        out.labels.extend_from_slice(&other.labels);
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClientDataset {
    pub train: Samples,
    pub test: Samples,
    /// Sorted labels this client was assigned.
    pub label_set: Vec<usize>,
}

impl ClientDataset {
    /// Placeholder for data-free models such as the quadratic oracle.
    pub fn data_free() -> Self {
        Self::default()
    }
}

/// `n` data-free clients.
pub fn data_free_clients(n: usize) -> Vec<ClientDataset> {
    vec![ClientDataset::data_free(); n]
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederatedDataset {
    pub clients: Vec<ClientDataset>,
    pub n_features: usize,
    pub n_classes: usize,
    /// Clients whose training data was reduced by [`apply_cutoff`].
    pub cut_clients: Vec<usize>,
}

impl FederatedDataset {
    pub fn n_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn label_sets(&self) -> Vec<Vec<usize>> {
        self.clients.iter().map(|c| c.label_set.clone()).collect()
    }

    /// Mean and population standard deviation of per-client sample counts.
    pub fn sample_stats(&self) -> (f64, f64) {
        let counts: Vec<f64> = self
            .clients
            .iter()
            .map(|c| (c.train.len() + c.test.len()) as f64)
            .collect();
        let n = counts.len().max(1) as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    /// Checks the split invariants: non-empty train and test on every client.
    pub fn validate(&self) -> Result<()> {
        for (k, c) in self.clients.iter().enumerate() {
            if c.train.is_empty() || c.test.is_empty() {
                return Err(Error::TooFewSamples {
                    client: k,
                    count: c.train.len() + c.test.len(),
                });
            }
            if c.train.n_features != self.n_features || c.test.n_features != self.n_features {
                return Err(Error::DimensionMismatch {
                    expected: self.n_features,
                    got: c.train.n_features,
                });
            }
        }
        Ok(())
    }

    /// All training samples pooled in client order.
    pub fn pooled_train(&self) -> Samples {
        self.clients
            .iter()
            .fold(Samples::empty(self.n_features), |acc, c| acc.concat(&c.train))
    }
}

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_clients: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub labels_per_client: usize,
    pub samples_mean: f64,
    pub samples_std: f64,
    /// Std of the global class means.
    #[serde(default = "default_class_sep")]
    pub class_sep: f64,
    /// Std of the per-client mean shift.
    #[serde(default = "default_client_shift")]
    pub client_shift: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_class_sep() -> f64 {
    1.5
}

fn default_client_shift() -> f64 {
    0.5
}

impl SyntheticSpec {
    pub fn new(n_clients: usize, n_features: usize, n_classes: usize, labels_per_client: usize) -> Self {
        SyntheticSpec {
            n_clients,
            n_features,
            n_classes,
            labels_per_client,
            samples_mean: 100.0,
            samples_std: 30.0,
            class_sep: default_class_sep(),
            client_shift: default_client_shift(),
            seed: 0,
        }
    }
}

/// Draws a federated dataset with label-subset partitioning.
///
/// Class `c` has a global mean `μ_c ~ N(0, class_sep² I)`; client `k` adds a
/// shift `δ_k ~ N(0, client_shift² I)` and draws `x ~ N(μ_c + δ_k, I)`.
/// Per-client counts are lognormal with the requested mean and std, never
/// below `max(4, labels_per_client)`. All samples land in `train`; call
/// [`split`] to carve out test sets.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<FederatedDataset> {
    let SyntheticSpec {
        n_clients,
        n_features,
        n_classes,
        labels_per_client,
        samples_mean,
        samples_std,
        class_sep,
        client_shift,
        seed,
    } = *spec;
    if n_clients == 0 || n_features == 0 || n_classes == 0 {
        return Err(Error::InvalidConfig("clients, features and classes must be positive".into()));
    }
    if labels_per_client == 0 || labels_per_client > n_classes {
        return Err(Error::InvalidConfig(format!(
            "labels_per_client {labels_per_client} not in 1..={n_classes}"
        )));
    }
    if !(samples_mean >= 4.0) || !(samples_std >= 0.0) || !(class_sep >= 0.0) || !(client_shift >= 0.0) {
        return Err(Error::InvalidConfig(
            "need samples_mean >= 4 and non-negative std, class_sep, client_shift".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class_means: Vec<Vec<f64>> = (0..n_classes)
        .map(|_| gaussian_vec(&mut rng, n_features, class_sep))
        .collect();
    let count_dist = if samples_std > 0.0 {
        let sigma2 = (1.0 + (samples_std / samples_mean).powi(2)).ln();
        Some(LogNormal::new(samples_mean.ln() - sigma2 / 2.0, sigma2.sqrt()).expect("valid lognormal"))
    } else {
        None
    };
    let min_count = labels_per_client.max(4);
    let mut clients = Vec::with_capacity(n_clients);
    for _ in 0..n_clients {
        let mut label_set = index::sample(&mut rng, n_classes, labels_per_client).into_vec();
        label_set.sort_unstable();
        let shift = gaussian_vec(&mut rng, n_features, client_shift);
        let count = match &count_dist {
            Some(d) => d.sample(&mut rng).round() as usize,
            None => samples_mean.round() as usize,
        }
        .max(min_count);
        let mut train = Samples::empty(n_features);
        let mut row = vec![0.0; n_features];
        for i in 0..count {
            // the first samples cover every assigned label once
            let label = if i < labels_per_client {
                label_set[i]
            } else {
                label_set[rng.random_range(0..labels_per_client)]
            };
            for (j, x) in row.iter_mut().enumerate() {
                let noise: f64 = rng.sample(StandardNormal);
                *x = class_means[label][j] + shift[j] + noise;
            }
            train.push(&row, label);
        }
        clients.push(ClientDataset {
            train,
            test: Samples::empty(n_features),
            label_set,
        });
    }
    Ok(FederatedDataset {
        clients,
        n_features,
        n_classes,
        cut_clients: Vec::new(),
    })
}

fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, std: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, std).expect("finite std");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Re-splits every client's pooled samples into train and test.
///
/// The train count is `round(train_fraction · n)` clamped to `1..=n-1`.
pub fn split(dataset: &FederatedDataset, train_fraction: f64, seed: u64) -> Result<FederatedDataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction {train_fraction} not in (0, 1)"
        )));
    }
    let mut out = dataset.clone();
    for (k, client) in out.clients.iter_mut().enumerate() {
        let pooled = client.train.concat(&client.test);
        let n = pooled.len();
        if n < 2 {
            return Err(Error::TooFewSamples { client: k, count: n });
        }
        let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::stream(seed, rng::SETUP_ROUND, k as u64));
        let (tr, te) = order.split_at(n_train);
        client.train = pooled.subset(&sorted(tr));
        client.test = pooled.subset(&sorted(te));
    }
    Ok(out)
}

fn sorted(idx: &[usize]) -> Vec<usize> {
    let mut v = idx.to_vec();
    v.sort_unstable();
    v
}

/// Keeps only `keep_fraction` of the training data on `⌈fraction_of_clients · N⌉`
/// randomly chosen clients. Test sets are untouched; at least one training
/// sample always survives. The chosen clients are recorded in `cut_clients`.
pub fn apply_cutoff(
    dataset: &FederatedDataset,
    fraction_of_clients: f64,
    keep_fraction: f64,
    seed: u64,
) -> Result<FederatedDataset> {
    if !(fraction_of_clients > 0.0 && fraction_of_clients <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "fraction_of_clients {fraction_of_clients} not in (0, 1]"
        )));
    }
    if !(keep_fraction > 0.0 && keep_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("keep_fraction {keep_fraction} not in (0, 1)")));
    }
    let n = dataset.n_clients();
    let n_cut = ((fraction_of_clients * n as f64).ceil() as usize).min(n);
    let mut rng = rng::stream(seed, rng::SETUP_ROUND, u32::MAX as u64);
    let mut cut = index::sample(&mut rng, n, n_cut).into_vec();
    cut.sort_unstable();
    let mut out = dataset.clone();
    for &k in &cut {
        let train = &out.clients[k].train;
        let keep = ((keep_fraction * train.len() as f64).round() as usize).clamp(1, train.len().max(1));
        let kept = sorted(&index::sample(&mut rng, train.len(), keep).into_vec());
        out.clients[k].train = train.subset(&kept);
    }
    let mut all: BTreeSet<usize> = out.cut_clients.iter().copied().collect();
    all.extend(cut);
    out.cut_clients = all.into_iter().collect();
    Ok(out)
}

/// Writes the CSV bundle: `client_id,split,label,f0..f{d-1}`.
pub fn save_csv(dataset: &FederatedDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["client_id".to_string(), "split".into(), "label".into()];
    header.extend((0..dataset.n_features).map(|j| format!("f{j}")));
    writer.write_record(&header)?;
    for (k, client) in dataset.clients.iter().enumerate() {
        for (name, samples) in [("train", &client.train), ("test", &client.test)] {
            for i in 0..samples.len() {
                let mut record = vec![k.to_string(), name.to_string(), samples.labels[i].to_string()];
                record.extend(samples.row(i).iter().map(f64::to_string));
                writer.write_record(&record)?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads the CSV bundle written by [`save_csv`].
///
/// Clients are numbered `0..=max(client_id)`; `n_classes` is one past the
/// largest label and each client's label set is the labels it holds.
pub fn load_csv(path: impl AsRef<Path>) -> Result<FederatedDataset> {
    let path = path.as_ref();
    let schema = |message: String| Error::Schema {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header = reader.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| schema(format!("missing column `{name}`")))
    };
    let (c_client, c_split, c_label) = (col("client_id")?, col("split")?, col("label")?);
    let mut feature_cols = Vec::new();
    while let Some(pos) = header.iter().position(|h| h == format!("f{}", feature_cols.len())) {
        feature_cols.push(pos);
    }
    if feature_cols.is_empty() {
        return Err(schema("missing feature column `f0`".into()));
    }
    if header.len() != 3 + feature_cols.len() {
        return Err(schema(format!(
            "unexpected columns; expected client_id, split, label, f0..f{}",
            feature_cols.len() - 1
        )));
    }
    let n_features = feature_cols.len();
    let mut clients: Vec<ClientDataset> = Vec::new();
    let mut row = vec![0.0; n_features];
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let parse_err = |column: &str, message: String| Error::Parse {
            path: path.to_path_buf(),
            row: line,
            column: column.to_string(),
            message,
        };
        let client: usize = record[c_client]
            .parse()
            .map_err(|e| parse_err("client_id", format!("{e}")))?;
        let label: usize = record[c_label]
            .parse()
            .map_err(|e| parse_err("label", format!("{e}")))?;
        for (j, &c) in feature_cols.iter().enumerate() {
            row[j] = record[c]
                .parse()
                .map_err(|e| parse_err(&format!("f{j}"), format!("{e}")))?;
        }
        if client >= clients.len() {
            clients.resize_with(client + 1, || ClientDataset {
                train: Samples::empty(n_features),
                test: Samples::empty(n_features),
                label_set: Vec::new(),
            });
        }
        let target = match &record[c_split] {
            "train" => &mut clients[client].train,
            "test" => &mut clients[client].test,
            other => return Err(parse_err("split", format!("expected train or test, got `{other}`"))),
        };
        target.push(&row, label);
    }
    let mut n_classes = 0;
    for (k, client) in clients.iter_mut().enumerate() {
        let labels: BTreeSet<usize> = client.train.labels.iter().chain(&client.test.labels).copied().collect();
        if labels.is_empty() {
            return Err(schema(format!("client {k} has no rows")));
        }
        n_classes = n_classes.max(labels.iter().max().map_or(0, |m| m + 1));
        client.label_set = labels.into_iter().collect();
    }
    Ok(FederatedDataset {
        clients,
        n_features,
        n_classes,
        cut_clients: Vec::new(),
    })
}
