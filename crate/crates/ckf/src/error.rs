use thiserror::Error;

use crate::belief::EntityId;

/// Errors surfaced by the engine and its I/O layers.
#[derive(Debug, Error)]
pub enum CkfError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("entity {0} already exists")]
    DuplicateEntity(EntityId),

    #[error("event at t={event_time} precedes state of {id} at t={state_time}")]
    TimeOrder {
        id: EntityId,
        event_time: f64,
        state_time: f64,
    },

    #[error("covariance for {id} violates store invariants: {reason}")]
    InvalidCovariance { id: EntityId, reason: String },

    #[error("matrix inversion failed: {0}")]
    Numerical(String),

    #[error("line {line}: {reason}")]
    Ingest { line: u64, reason: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CkfError>;
