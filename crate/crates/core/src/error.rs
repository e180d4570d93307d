use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate mode: {0}")]
    Degenerate(String),

    #[error("data not orthogonal to degenerate mode k={k}: psi_k = {psi_k:e}")]
    NonOrthogonalData { k: usize, psi_k: f64 },

    #[error("no candidate points supplied")]
    EmptyCandidates,

    #[error("accuracy target missed: {0}")]
    Accuracy(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn shape<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Shape(msg.into()))
}
