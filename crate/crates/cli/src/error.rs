use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error(transparent)]
    Core(#[from] muck_core::Error),
    #[error("plot error: {0}")]
    Plot(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("norm did not converge: {0}")]
    NotConverged(String),
    #[error("invariant violated: {0}")]
    Violation(String),
}

impl CliError {
    pub fn config(key: &str, msg: impl Into<String>) -> Self {
        CliError::Config { key: key.to_owned(), msg: msg.into() }
    }

    /// 2 is reserved for mathematical invariant violations.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
