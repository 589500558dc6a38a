use thiserror::Error;

pub type Result<T> = std::result::Result<T, QecError>;

#[derive(Debug, Error)]
pub enum QecError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("expected a square matrix, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("map is not completely positive: eigenvalue {0:.3e} below tolerance")]
    NotCompletelyPositive(f64),
    #[error("{0} did not converge within {1} iterations")]
    NonConvergence(&'static str, usize),
    #[error("imaginary residue {0:.3e} in a quantity that must be real")]
    ImaginaryResidue(f64),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("adjoint identity self-test failed (residual {0:.3e})")]
    AdjointMismatch(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
