use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("behavior probability is zero for the taken action (coverage violation)")]
    ZeroBehaviorProbability,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid feature vector: {0}")]
    InvalidFeatures(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid transition: {0}")]
    InvalidTransition(String),

    #[error("invalid state {0}")]
    InvalidState(usize),

    #[error("illegal action {action} in state {state}")]
    IllegalAction { state: usize, action: usize },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("hallway {0} is unreachable")]
    UnreachableHallway(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("no data accumulated")]
    Empty,

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("rollout from state {0} did not terminate within the horizon cap")]
    HorizonExceeded(usize),

    #[error("interest has zero mass")]
    ZeroInterest,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("corrupt results: {0}")]
    CorruptResults(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
