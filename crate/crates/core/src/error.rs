use std::path::PathBuf;

use thiserror::Error;

use crate::scene::AgentId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid agent: {0}")]
    InvalidAgent(String),

    #[error("invalid trajectory log: {0}")]
    InvalidLog(String),

    #[error("{0}")]
    InvalidConfig(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("agent {0} has no trajectory samples at or before the requested frame")]
    NoHistory(AgentId),

    #[error("degenerate pose: {0}")]
    DegeneratePose(String),

    #[error("unknown agent id {0}")]
    UnknownAgent(AgentId),

    #[error("simulation already finished")]
    Finished,

    #[error("{path}:{line}: {message}")]
    Data {
        path: String,
        line: u64,
        message: String,
    },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
