use thiserror::Error;

/// Errors reported by state validation, kernel preconditions, and the
/// decomposition search.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |m - m^H| entry = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue = {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is not one (trace = {trace_re:.12} + {trace_im:.3e}i)")]
    TraceNotOne { trace_re: f64, trace_im: f64 },

    #[error("vector is not normalized (norm = {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("matrix contains a non-finite entry")]
    NotFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "seed decomposition does not reconstruct the target state (trace-norm gap = {gap:.3e})"
    )]
    SeedMismatch { gap: f64 },

    #[error("decomposition cost {cost:.9} exceeds 1 + sep_tol = {limit:.9}; positivization needs a near-optimal decomposition")]
    CostTooHigh { cost: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
