use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("graph construction gave up after {restarts} restarts (n={n}, gamma={gamma}, rho={rho})")]
    ConstructionTimeout {
        n: usize,
        gamma: usize,
        rho: usize,
        restarts: usize,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("message length {actual} does not match code dimension {expected}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("alist parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("inconsistent degrees: {0}")]
    DegreeInconsistency(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("fault plan exceeds budget: {0}")]
    BudgetViolation(String),

    #[error("unknown adversary strategy `{0}`")]
    UnknownStrategy(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
