use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the simulation and estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("orbit hits non-differentiable point {point} at iterate {iterate}")]
    BranchBoundary { point: f64, iterate: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point is not periodic with period {period} (closure error {error:e})")]
    NotPeriodic { period: usize, error: f64 },

    #[error("series has no exceedances above the threshold")]
    NoExceedances,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("insufficient data: need {needed} points, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("degenerate cluster law: {0}")]
    DegenerateClusterLaw(String),

    #[error("alpha depth {requested} exceeds configured maximum {max}")]
    DepthExceeded { requested: usize, max: usize },

    #[error("observable series has zero variance")]
    ZeroVariance,

    #[error("unknown experiment id `{0}`")]
    UnknownExperiment(String),

    #[error("{path}: row {row}: {reason}")]
    Parse { path: PathBuf, row: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
