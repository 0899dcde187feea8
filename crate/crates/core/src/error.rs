use thiserror::Error;

/// Errors produced by the percolation laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("input out of domain: {0}")]
    Domain(String),
    /// The operation is well-defined but declines to run (empty giant, enumeration too large).
    #[error("refused: {0}")]
    Refused(String),
    /// The request exceeds the configured memory budget or dimension cap.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
