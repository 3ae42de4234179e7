//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A state, mask, or model pair has inconsistent lengths.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A spin state was used with a model of the other variable domain.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// A parameter violated its documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Exhaustive enumeration refused: the instance is too large.
    #[error("instance too large for exhaustive search: {size} variables (limit {limit})")]
    TooLarge { size: usize, limit: usize },

    /// The requested clique does not fit on the topology.
    #[error("embedding capacity exceeded: {requested} variables, capacity {capacity}")]
    Capacity { requested: usize, capacity: usize },

    /// An embedding failed validation against its topology or model.
    #[error("invalid embedding: {0}")]
    EmbeddingInvalid(String),

    /// A model, graph, or sample file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
