use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A stated precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The operation is not supported for this law (e.g. missing density).
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    /// A numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Constant fitting could not find an admissible constant.
    #[error("fit failure: {0}")]
    FitFailure(String),
    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
