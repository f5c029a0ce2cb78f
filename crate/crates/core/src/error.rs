use alloc::string::String;

/// Errors produced by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degree {needed} exceeds basis limit {max}")]
    DegreeOverflow { needed: usize, max: usize },

    #[error("eigensolver failed to converge")]
    EigenNoConvergence,

    #[error("degenerate multiplier: largest eigenvalue {0} is not positive")]
    DegenerateMultiplier(f64),

    #[error("bound vacuous: surrogate value {0} is not below 1")]
    BoundVacuous(f64),

    #[error("kernel non-invertible on needed harmonics: lambda_{k} = {lambda}")]
    KernelNonInvertible { k: usize, lambda: f64 },

    #[error("polynomial must be homogeneous of even degree, got degree {0}")]
    OddDegree(usize),

    #[error("term degree {found} does not match polynomial degree {expected}")]
    NotHomogeneous { expected: usize, found: usize },

    #[error("unsupported sphere dimension {0}")]
    UnsupportedDimension(usize),

    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),

    #[error("unknown or inconsistent subsystem label: {0}")]
    LabelMismatch(String),

    #[error("operator size {0} exceeds the supported cap")]
    SizeOverflow(usize),

    #[error("operator is not block-positive (min product-state value {0})")]
    NotBlockPositive(f64),

    #[error("normalized polynomial leaves [0, 1] on the sphere (min {0})")]
    NotNormalized(f64),

    #[error("gap certificate did not verify after {0} doublings")]
    GapSearchExhausted(usize),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidArgument(String::from(msg))
}
