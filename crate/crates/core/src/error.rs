use thiserror::Error;

pub type Result<T, E = GtoError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GtoError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("cutoff {cutoff} leaves tail mass {tail:e} above tolerance {tol:e}")]
    Cutoff { cutoff: usize, tail: f64, tol: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GtoError {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        GtoError::Dimension(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GtoError::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GtoError::Domain(msg.into())
    }
}
