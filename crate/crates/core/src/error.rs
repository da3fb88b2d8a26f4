use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point lies outside the domain of its space.
    #[error("domain error: {0}")]
    Domain(String),
    /// A map sent a point outside its domain.
    #[error("range error: {0}")]
    Range(String),
    /// Malformed or insufficient input to an operation (empty samples, bad index).
    #[error("argument error: {0}")]
    Argument(String),
    /// A parameter violates its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Unknown catalog name.
    #[error("lookup error: unknown map `{0}`")]
    Lookup(String),
    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
