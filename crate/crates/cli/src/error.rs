use std::path::PathBuf;

use dkpca::DkpcaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{0}")]
    Dataset(DkpcaError),

    #[error(transparent)]
    Pipeline(#[from] DkpcaError),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// 2 configuration, 3 dataset, 4 pipeline failure, 5 output.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Dataset(_) => 3,
            CliError::Pipeline(e) => match e.root() {
                DkpcaError::Parameter(_) => 2,
                DkpcaError::Dataset(_) | DkpcaError::Parse { .. } => 3,
                _ => 4,
            },
            CliError::Output { .. } => 5,
        }
    }
}
