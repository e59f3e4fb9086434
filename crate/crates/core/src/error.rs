use thiserror::Error;

/// Errors produced by the analytic and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A requested feature is outside the supported range (e.g. Nakagami order cap).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Configuration file could not be read or parsed.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
