use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Line 0 marks whole-scenario checks.
    #[error("scenario line {line}: {msg}")]
    Scenario { line: usize, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] sic_core::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
