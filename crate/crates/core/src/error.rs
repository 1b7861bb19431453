use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("leading coefficient is zero")]
    NonmonicZero,
    #[error("roots are not separated: min gap {gap:e} below {threshold:e}")]
    DegenerateRoots { gap: f64, threshold: f64 },
    #[error("root {index} is zero; the sinh kernel divides by it")]
    ZeroRoot { index: usize },
    #[error("order m = {0} is not supported on this path (need m >= 2)")]
    OrderTooLow(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("repeated-root forcing needs a kernel measure; run the discrepancy probe first")]
    UnresolvedKernel,
    #[error("need at least {needed} uniformly spaced snapshots, got {got}")]
    InsufficientSnapshots { needed: usize, got: usize },
    #[error("probe inconclusive: {0}")]
    Inconclusive(String),
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("exponent must be a constant integer (at byte {0})")]
    NonIntegerExponent(usize),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
