use thiserror::Error;

/// Errors raised across the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian: {0}")]
    NotHermitian(String),
    #[error("not positive definite: non-positive pivot {pivot:e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("shift coincides with spectrum: singular pivot at column {0}")]
    SingularPivot(usize),
    #[error("no positive spectrum detected")]
    NoPositiveSpectrum,
    #[error("indefinite spectrum: Ritz values span [{0:e}, {1:e}]; supply a projection basis")]
    IndefiniteSpectrum(f64, f64),
    #[error("invalid shift {0}: {1}")]
    InvalidShift(num_complex::Complex64, String),
    #[error("right-hand side leaks into the negative eigenspace (relative {0:e}); project it first")]
    RhsLeakage(f64),
    #[error("singular preconditioner mode {0}")]
    SingularMode(usize),
    #[error("matrix market: {0}")]
    MatrixMarket(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
