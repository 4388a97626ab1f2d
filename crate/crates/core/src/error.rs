use thiserror::Error;

use crate::verdict::Verdict;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid diagram: {0}")]
    Diagram(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("vertices {0} and {1} are not incident, so the set is not a flag")]
    NotAFlag(usize, usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("stage invariant violated after {context}: {verdict}")]
    InvariantViolation {
        context: String,
        verdict: Box<Verdict>,
    },
    #[error("subspace: {0}")]
    Subspace(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
