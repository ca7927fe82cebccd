use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("infinite diameter: graph is disconnected")]
    Disconnected,

    #[error("target diameter unattainable with given spec: {0}")]
    DiameterUnattainable(String),

    #[error("could only place {placed} of {requested} parts")]
    PartitionPlacement { placed: usize, requested: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("construction defined for D >= 3, got D = {0}")]
    DiameterTooSmall(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("diameter parity mismatch: {0}")]
    Parity(&'static str),

    #[error("span too small: dist(P, Q) = {actual} exceeds span {span}")]
    SpanTooSmall { actual: u32, span: u32 },

    #[error("path node p_{0} is unreachable from the root of the layered graph")]
    UnreachableLeaf(usize),

    #[error("insufficient sampling rounds: need round {needed}, only {available} available")]
    InsufficientRounds { needed: usize, available: usize },

    #[error("provenance mismatch: edge ({0}, {1}) is not in the augmented subgraph")]
    ProvenanceMismatch(usize, usize),

    #[error("capacity violation at round {round}: node {node} on edge ({node}, {neighbor}): {detail}")]
    Capacity {
        round: u64,
        node: usize,
        neighbor: usize,
        detail: String,
    },

    #[error("simulation exceeded {0} rounds")]
    RoundLimit(u64),

    #[error("guessing exhausted: no diameter guess up to {0} succeeded")]
    GuessingExhausted(u32),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
