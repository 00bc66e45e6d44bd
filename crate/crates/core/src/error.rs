use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("domain {domain} declares {declared} venues but lists {actual}")]
    Cardinality { domain: String, declared: usize, actual: usize },
    #[error("unknown slot `{0}`")]
    UnknownSlot(String),
    #[error("action `{0}` is not in the agent's action set")]
    UnknownAction(String),
    #[error("feature catalogue mismatch: expected `{expected}`, found `{found}`")]
    CatalogueMismatch { expected: String, found: String },
    #[error("agent {0} is frozen; update rejected")]
    FrozenAgent(String),
    #[error("missing checkpoint {0}")]
    MissingCheckpoint(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("session {0} is finished")]
    SessionFinished(String),
    #[error("session {0} is still active")]
    SessionActive(String),
    #[error("questionnaire for session {0} already submitted")]
    DuplicateQuestionnaire(String),
    #[error("rating {field} = {value} outside 1..=6")]
    RatingOutOfRange { field: &'static str, value: u8 },
    #[error("malformed dialogue log: {0}")]
    MalformedLog(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse { what: what.into(), message: message.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
