use thiserror::Error;

/// Errors raised by the estimators, generators and experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symmetric eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("Cholesky factorization failed: {0}")]
    Cholesky(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}

pub(crate) fn param_err(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
