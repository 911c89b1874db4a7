use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes or dimensions that do not fit together.
    #[error("structural error: {0}")]
    Structure(String),
    /// A parameter outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is well formed but not supported by the construction.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Input that makes the computed quantity meaningless (zero norms, nonpositive ratios).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// A chart point outside the local parametrization.
    #[error("outside chart: {0}")]
    Chart(String),
    /// Configuration or command-line problems.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structure(msg: impl Into<String>) -> Error {
    Error::Structure(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
