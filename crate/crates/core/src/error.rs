use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid dimensions: {0}")]
    InvalidDimension(String),
    #[error("cannot assign {k} distinct workers out of {n}")]
    InvalidAssignment { k: usize, n: usize },
    #[error("cluster {cluster} has {size} workers, fewer than the {required} required")]
    InsufficientCluster {
        cluster: usize,
        size: usize,
        required: usize,
    },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("duplicate worker {worker} for task {task}")]
    DuplicateWorker { task: usize, worker: usize },
    #[error("no votes to aggregate")]
    NoVotes,
    #[error("vote and weight lengths differ ({votes} vs {weights})")]
    ShapeMismatch { votes: usize, weights: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("invalid worker pair ({0}, {1})")]
    InvalidPair(usize, usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("estimation failed: {0}")]
    EstimationFailed(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
