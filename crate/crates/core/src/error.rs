use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid outcome space: {0}")]
    InvalidSpace(String),
    #[error("invalid random set: {0}")]
    InvalidRandomSet(String),
    #[error("invalid capacity: {0}")]
    InvalidCapacity(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("iteration limit reached after {iterations} iterations")]
    MaxIter { iterations: usize },
    #[error("model error: {0}")]
    Model(String),
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
