use thiserror::Error;

use crate::nodeset::{NodeId, NodeSet};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("node {node} is outside 1..={n}")]
    NodeOutOfRange { node: NodeId, n: usize },

    #[error("{set} is not a feasible fault set (not contained in any of {generators})")]
    Infeasible { set: NodeSet, generators: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown adversary strategy `{0}`")]
    UnknownAdversary(String),

    #[error("trace has {actual} rounds but certification needs at least {required}")]
    TraceTooShort { required: usize, actual: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
