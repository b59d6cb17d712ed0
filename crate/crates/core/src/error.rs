use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("structural error in layer {layer}: {reason}")]
    Structural { layer: usize, reason: String },
    #[error("absent site {qubit}: {reason}")]
    Absent { qubit: String, reason: String },
    #[error("no feasible schedule: {0}")]
    Search(String),
    #[error("routing failure: {0}")]
    Routing(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse { token: token.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
