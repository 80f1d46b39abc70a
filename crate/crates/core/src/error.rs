use thiserror::Error;

/// Errors raised by the exact algebra and search routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("matrix is not square ({rows} rows, row of length {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension must be at least 2, found {0}")]
    DimensionTooSmall(usize),

    #[error("Gram matrix is not symmetric")]
    NotSymmetric,

    #[error("bilinear form is degenerate (determinant 0)")]
    DegenerateForm,

    #[error("functional is zero")]
    ZeroFunctional,

    #[error("vector is zero")]
    ZeroVector,

    #[error("anchor vector is isotropic: B(w,w) = 0")]
    IsotropicAnchor,

    #[error("Gram matrix has non-integral entries")]
    NonIntegralForm,

    #[error("vector has non-integral entries")]
    NonIntegralVector,

    #[error("endomorphism is not in the even component")]
    NotEven,

    #[error("target norm {0} is negative")]
    NegativeTarget(String),

    #[error("form is not positive definite")]
    NotPositiveDefinite,

    #[error("z0 choice is degenerate: {0}")]
    DegenerateZ0(String),

    #[error("family parameters violate the determinant relation: {0}")]
    BadFamilyParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
