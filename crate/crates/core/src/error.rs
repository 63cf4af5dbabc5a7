use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("vector field lacks {0}")]
    MissingCapability(&'static str),
    #[error("time {0} is not a grid point of the driver")]
    OffGrid(f64),
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
    #[error("area process has kind {got}, expected {expected}")]
    AreaKind { expected: String, got: String },
    #[error("criterion integral diverges: {0}")]
    Divergent(String),
    #[error("infeasible construction: {0}")]
    Infeasible(String),
    #[error("configuration rejected: {0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}
