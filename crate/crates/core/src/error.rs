use thiserror::Error;

/// Failures of the dense linear algebra and root-finding kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("spectrum does not have the one-real-plus-conjugate-pairs shape: {0}")]
    SpectrumShapeViolation(String),
    #[error("expected {expected} real roots, located {found}")]
    RootCountMismatch { expected: usize, found: usize },
}

/// Invalid stage counts or precisions requested from the tableau builder.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableauError {
    #[error("stage count must be odd and positive, got {0}")]
    InvalidStages(usize),
    #[error("precision must be at least 53 bits, got {0}")]
    InvalidPrecision(u32),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("step size underflow at t = {t:e} (dt = {dt:e})")]
    StepSizeUnderflow { t: f64, dt: f64 },
    #[error("Newton iteration failed {failures} consecutive times at t = {t:e}")]
    MaxNewtonFailures { t: f64, failures: usize },
    #[error("non-finite state encountered at t = {t:e}")]
    NonFiniteState { t: f64 },
    #[error("step limit of {limit} reached at t = {t:e}")]
    MaxStepsExceeded { t: f64, limit: usize },
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("unknown problem `{0}` (known: oregonator, robertson, hires, pollution)")]
    UnknownProblem(String),
}
