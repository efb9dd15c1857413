use oriented_geodesics::GeometryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid surface parameters: {0}")]
    Surface(#[from] GeometryError),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("failed to write report: {0}")]
    Emit(String),
}

pub type Result<T> = std::result::Result<T, VerifyError>;
