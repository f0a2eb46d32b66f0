use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("bandwidth must be even, got {0}")]
    OddBandwidth(usize),

    #[error("index ({i}, {j}) out of range for dimension {dim}")]
    IndexOutOfRange { i: usize, j: usize, dim: usize },

    #[error("matrix is not symmetric: entry ({i}, {j}) has no equal mirror")]
    NotSymmetric { i: usize, j: usize },

    #[error("symmetric operation requires a symmetric matrix")]
    SymmetryRequired,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("dropped recurrence diverged at step {step} (|T| grew by more than 1e6)")]
    RecurrenceDiverged { step: usize },

    #[error("quadrature node {node} failed: {source}")]
    QuadratureNode {
        node: i64,
        #[source]
        source: Box<Error>,
    },

    #[error("dense oracle self-check failed: {0}")]
    OracleCheck(String),

    #[error("dimension {0} exceeds cap {1} for dense computation")]
    DenseCapExceeded(usize, usize),
}
