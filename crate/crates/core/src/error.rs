use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. a level
    /// `p` outside `(0,1]`).
    #[error("domain error: {0}")]
    Domain(String),

    /// An input object violates its structural invariants.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("vector is not K-concentrated: {0}")]
    NotConcentrated(String),

    /// A bounded search finished without producing a verified result.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
