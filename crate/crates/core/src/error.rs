use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Prefix the message with the pipeline stage that produced it.
    pub fn at_stage(self, stage: &str) -> Error {
        match self {
            Error::Argument(m) => Error::Argument(format!("{stage}: {m}")),
            Error::Range(m) => Error::Range(format!("{stage}: {m}")),
            Error::NumericFailure(m) => Error::NumericFailure(format!("{stage}: {m}")),
            Error::Precondition(m) => Error::Precondition(format!("{stage}: {m}")),
            Error::Unsupported(m) => Error::Unsupported(format!("{stage}: {m}")),
        }
    }
}

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

pub(crate) fn numeric<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::NumericFailure(msg.into()))
}
