use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not a Lagrangian: {0}")]
    NotLagrangian(String),
    #[error("not symplectic: {0}")]
    NotSymplectic(String),
    #[error("malformed complex: {0}")]
    Complex(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
