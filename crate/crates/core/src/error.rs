use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix must have at least one row and one column")]
    Empty,

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error("constraint system is empty")]
    NoConstraints,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// An inverse that always exists for complex matrices could not be
    /// certified; this points at a numerical or implementation fault.
    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("unknown suite label `{0}`")]
    UnknownSuite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
