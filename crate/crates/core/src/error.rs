use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the DKPCA pipeline.
#[derive(Debug, Error)]
pub enum DkpcaError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// The data is well formed but unusable (too few senses, empty vocabulary...).
    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("kernel cache: {0}")]
    Cache(String),

    /// A lower-level error annotated with the experiment coordinates it occurred in.
    #[error("{dataset} (repeat {repeat}): {source}")]
    InRepeat {
        dataset: String,
        repeat: usize,
        #[source]
        source: Box<DkpcaError>,
    },
}

pub type Result<T, E = DkpcaError> = std::result::Result<T, E>;

impl DkpcaError {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        DkpcaError::Parameter(msg.into())
    }

    pub(crate) fn dataset(msg: impl Into<String>) -> Self {
        DkpcaError::Dataset(msg.into())
    }

    /// Strips repeat annotations.
    pub fn root(&self) -> &DkpcaError {
        match self {
            DkpcaError::InRepeat { source, .. } => source.root(),
            other => other,
        }
    }
}
