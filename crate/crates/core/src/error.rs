use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument does not hold.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A computation would leave the representable floating point range.
    #[error("range error: {0}")]
    Range(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("search error: {0}")]
    Search(String),
    /// Malformed serialised input.
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
