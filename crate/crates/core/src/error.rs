use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid problem size {n}: {reason}")]
    InvalidSize { n: usize, reason: &'static str },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("exhaustive search refused for n = {n} (limit {limit})")]
    SizeGuard { n: usize, limit: usize },

    #[error("unknown parameter `{0}`")]
    UnknownParam(String),

    #[error("step {step} outside schedule of {n_steps} steps")]
    StepOutOfRange { step: usize, n_steps: usize },

    #[error("non-finite amplitude at step {step}")]
    Divergence { step: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("undefined: {0}")]
    Undefined(&'static str),

    #[error("degenerate fit: {0}")]
    Degenerate(&'static str),
}
