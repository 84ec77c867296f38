use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the clustering toolkit.
#[derive(Debug, Error)]
pub enum MvfcError {
    #[error("{path}: io error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: csv error: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("{path}: has {found} samples but {expected} were expected")]
    SampleCountMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("label vector has length {found}, dataset has {expected} samples")]
    LabelLength { expected: usize, found: usize },

    #[error("dataset has no ground-truth labels")]
    MissingLabels,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("cluster {cluster} has zero total membership weight")]
    DegenerateCluster { cluster: usize },

    #[error("rank {rank} outside [1, {max}]")]
    RankOutOfBounds { rank: usize, max: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid score table: {0}")]
    InvalidScoreTable(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, MvfcError>;

impl MvfcError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MvfcError::Io {
            path: path.into(),
            source,
        }
    }
}
