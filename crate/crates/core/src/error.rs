use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A grid cannot represent the requested field or propagation.
    #[error("sampling error: {0}")]
    Sampling(String),
    /// A lattice fit is degenerate.
    #[error("fit error: {0}")]
    Fit(String),
    /// A move plan cannot be sequenced.
    #[error("planning error: {0}")]
    Planning(String),
    /// Scenario contents are missing or inconsistent.
    #[error("config error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Domain(_) | Error::Sampling(_) | Error::Fit(_) | Error::Planning(_) => 3,
            Error::Csv(_) | Error::Io(_) => 4,
        }
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
