use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of {domain}: {name} = {value}")]
    Domain {
        name: &'static str,
        value: String,
        domain: &'static str,
    },
    #[error("depth {depth} exceeds cap {cap}")]
    DepthCap { depth: usize, cap: usize },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("root not bracketed: {0}")]
    NotBracketed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::DepthCap { .. } => "depth_cap",
            Error::Budget(_) => "budget",
            Error::Invalid(_) => "invalid",
            Error::NotBracketed(_) => "not_bracketed",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
