use thiserror::Error;

/// Failures grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 2.
    #[error("config error: {0}")]
    Config(String),
    /// Exit 3.
    #[error("run diverged: {0}")]
    Divergence(String),
    /// Exit 1.
    #[error("verification failed: {0}")]
    Verify(String),
    /// Exit 1.
    #[error(transparent)]
    Core(fedlap_core::Error),
    /// Exit 1.
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            _ => 1,
        }
    }
}

impl From<fedlap_core::Error> for CliError {
    fn from(e: fedlap_core::Error) -> Self {
        use fedlap_core::Error as E;
        match e {
            E::NonFiniteParameter { .. } => CliError::Divergence(e.to_string()),
            E::InvalidConfig(_)
            | E::InvalidSampleSize { .. }
            | E::InvalidAlpha(_)
            | E::DuplicateEdge(..)
            | E::SelfLoop(_)
            | E::NegativeWeight { .. }
            | E::IndexOutOfRange { .. }
            | E::MissingLabelSets
            | E::Parse { .. }
            | E::Schema { .. }
            | E::Json(_) => CliError::Config(e.to_string()),
            other => CliError::Core(other),
        }
    }
}
