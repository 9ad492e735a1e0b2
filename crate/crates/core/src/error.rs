use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("self loop on client {0}")]
    SelfLoop(usize),
    #[error("negative weight {weight} on edge ({k}, {l})")]
    NegativeWeight { k: usize, l: usize, weight: f64 },
    #[error("client index {index} out of range for {n} clients")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("similar-label weights need one label set per client")]
    MissingLabelSets,
    #[error("empty data")]
    EmptyData,
    #[error("batch size {batch} exceeds {available} available samples")]
    BatchTooLarge { batch: usize, available: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("too few samples on client {client}: {count}")]
    TooFewSamples { client: usize, count: usize },
    #[error("invalid sample size {sample_size} for {n_clients} clients")]
    InvalidSampleSize { sample_size: usize, n_clients: usize },
    #[error(
        "non-finite parameter at round {round}, client {client} (last finite objective {last_objective})"
    )]
    NonFiniteParameter {
        round: usize,
        client: usize,
        last_objective: f64,
    },
    #[error("invalid averaging weight base {0}; need 0 < mu*R*S*alpha/(4N) < 1")]
    InvalidAlpha(f64),
    #[error("singular linear system")]
    SingularSystem,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{path}:{row}: column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },
    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
