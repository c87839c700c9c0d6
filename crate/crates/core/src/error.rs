use alloc::string::String;

/// Errors reported by fallible operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("nilpotency class {0} exceeds the supported maximum of 4")]
    UnsupportedClass(usize),
    #[error("dilation factor must be positive and finite, got {0}")]
    InvalidDilation(f64),
    #[error("vector does not lie in the {0} layer")]
    WrongLayer(&'static str),
    #[error("invalid ball: {0}")]
    InvalidBall(String),
    #[error("rejection sampling found no member after {0} attempts")]
    RejectionSampling(usize),
    #[error("parameter window violated: {0}")]
    ParameterWindow(String),
    #[error("profile is not positive on the domain (lower bound {0})")]
    NonPositiveProfile(f64),
    #[error("point lies outside the projection of the ball")]
    OutsideProjection,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
