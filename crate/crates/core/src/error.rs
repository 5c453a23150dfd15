use crate::graph::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("{0} and {1} are not adjacent")]
    NotAnEdge(VertexId, VertexId),

    #[error("invalid {what}: {value}")]
    InvalidWeight { what: String, value: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("region of {size} vertices exceeds the cap of {cap}")]
    Capacity { size: usize, cap: usize },

    #[error("vertex budget of {budget} exhausted before {what}")]
    Budget { budget: usize, what: String },

    #[error("{to} is unreachable from {from} within the exploration horizon")]
    Unreachable { from: VertexId, to: VertexId },

    #[error("undetermined: {0}")]
    Undetermined(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("verification failed: {0}")]
    Violation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
