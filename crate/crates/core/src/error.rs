use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("group is empty")]
    EmptyGroup,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("invalid value `{value}` for parameter `{name}`")]
    InvalidParameter { name: &'static str, value: String },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("edge references unknown vertex `{0}`")]
    DanglingEdge(String),
    #[error("vertex `{0}` declared more than once")]
    DuplicateVertex(String),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrussError {
    #[error("vertex {0} is not part of the truss state")]
    VertexAbsent(VertexId),
}

#[derive(Debug, Error, PartialEq)]
pub enum SpatialError {
    #[error("radius regressed from {previous} to {requested}")]
    NonMonotoneRadius { previous: f64, requested: f64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DsuError {
    #[error("vertex {0} inserted twice")]
    DoubleInsert(VertexId),
    #[error("vertex {0} was never inserted")]
    NotInserted(VertexId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForestError {
    #[error("edge ({0}, {1}) is not in the forest's graph")]
    EdgeAbsent(usize, usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("candidate is not a valid group: {0}")]
    InvalidCandidate(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("instance has {n} vertices, brute force is capped at {cap}")]
    InstanceTooLarge { n: usize, cap: usize },
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("returned group failed validation")]
    InvalidResult,
}
