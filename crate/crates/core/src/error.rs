use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical overflow in {0}")]
    Overflow(&'static str),
    #[error("quadrature did not converge: best estimate {best:e}, error estimate {error:e}")]
    Accuracy { best: f64, error: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("diagnostics: {0}")]
    Diagnostics(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Best available estimate carried by an accuracy failure.
    pub fn best_estimate(&self) -> Option<f64> {
        match self {
            Error::Accuracy { best, .. } => Some(*best),
            _ => None,
        }
    }
}
