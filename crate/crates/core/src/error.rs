use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpbError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invalid column mapping: {0}")]
    InvalidMapping(String),
    #[error("mapped column `{0}` not found in header")]
    MissingColumn(String),
    #[error("duplicate precinct keys (state, county, precinct_id): {}", .0.join("; "))]
    DuplicateKeys(Vec<String>),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("all x values are identical; slope is undefined")]
    DegenerateX,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl LpbError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LpbError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, LpbError>;
