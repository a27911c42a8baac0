use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("branch configuration error: {0}")]
    BranchConfiguration(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("non-contraction: {0}")]
    NonContraction(String),
    #[error("infeasible parameter search: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
