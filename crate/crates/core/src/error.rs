use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kernel must have at least one index")]
    EmptyKernel,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("kernel is not hermitian")]
    NotHermitian,
    #[error("sigma-shift of a size-1 kernel is empty")]
    EmptyShift,
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NotPositive { eigenvalue: f64, tolerance: f64 },
    #[error("kernel is not conditionally negative definite: compressed eigenvalue {eigenvalue:e} above {tolerance:e}")]
    NotConditionallyNegative { eigenvalue: f64, tolerance: f64 },
    #[error("kernel diagonal must vanish (entry {index} is {value:e})")]
    NonzeroDiagonal { index: usize, value: f64 },
    #[error("kernel must be real-valued for this operation")]
    NotReal,
    #[error("diagonal limits diverge: not a bounded functional")]
    Divergent,
    #[error("{condition} failed: {detail}")]
    ConditionFailed { condition: String, detail: String },
    #[error("block completion infeasible at scale {scale}: residual {residual:e} stalled after {iterations} iterations")]
    Infeasible { scale: f64, residual: f64, iterations: usize },
    #[error("feasibility indeterminate at scale {scale}: residual {residual:e} after {iterations} iterations")]
    Indeterminate { scale: f64, residual: f64, iterations: usize },
    #[error("{what} has size {size}, above the cap of {cap}")]
    CapExceeded { what: &'static str, size: usize, cap: usize },
    #[error("index {index} outside the constructed range 0..{len}")]
    OutOfRange { index: usize, len: usize },
    #[error("word is not reduced at position {0}")]
    NotReduced(usize),
    #[error("letter {letter} outside the generator range 1..={generators}")]
    BadLetter { letter: i32, generators: usize },
    #[error("selection rule failed at term {n}: no family member within {eps:e} on the first {n} points")]
    Selection { n: usize, eps: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
