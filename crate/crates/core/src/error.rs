use thiserror::Error;

use crate::ids::{ClientId, EsId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("context has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("context coordinate {index} = {value} lies outside [0, 1]")]
    ContextOutOfRange { index: usize, value: f64 },

    #[error("round index must be >= 1")]
    ZeroRound,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "instance has {pairs} assignable pairs, above the exact-solver cap of {cap}; use greedy"
    )]
    InstanceTooLarge { pairs: usize, cap: usize },

    #[error("no score for pair (client {client}, es {es})")]
    MissingScore { client: ClientId, es: EsId },

    #[error("pair (client {client}, es {es}) is not feasible this round")]
    InfeasiblePair { client: ClientId, es: EsId },

    #[error("outcome reported for unassigned pair (client {client}, es {es})")]
    UnassignedOutcome { client: ClientId, es: EsId },

    #[error("missing outcome for assigned pair (client {client}, es {es})")]
    MissingOutcome { client: ClientId, es: EsId },

    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-positive value {value} at index {index} inside the fit window")]
    NonPositive { index: usize, value: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user configuration rather than runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
