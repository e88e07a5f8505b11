use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("breakpoints are not monotone at index {index}")]
    NonMonotoneBreaks { index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("breakpoints must start at 0 and end at 1: {0}")]
    CoverageError(String),

    #[error("non-finite value in input")]
    NonFiniteValue,

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("intervals overlap")]
    OverlappingIntervals,

    #[error("affine image [{lo}, {hi}] escapes [0, 1]")]
    RangeError { lo: f64, hi: f64 },

    #[error("affine slope must be positive, got {0}")]
    NonPositiveSlope(f64),

    #[error("norm exponent must be >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("invalid signed permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid rearrangement partition: {0}")]
    InvalidPartition(String),

    #[error("incompatible spaces: {0}")]
    IncompatibleSpaces(String),

    #[error("unknown component {0}")]
    UnknownComponent(u32),

    #[error("duplicate component {0}")]
    DuplicateComponent(u32),

    #[error("probe set is empty")]
    EmptyProbeSet,

    #[error("time {0} is outside [0, 1]")]
    InvalidTime(f64),

    #[error("base time t0 = {0} must lie in [0, 1)")]
    InvalidT0(f64),

    #[error("expected a unit-norm vector, norm is {0}")]
    NotUnitNorm(f64),

    #[error("orbit mismatch: inputs lie in different orbits of the unit sphere")]
    OrbitMismatch,

    #[error("tolerance must be a positive finite number above 1e-10, got {0}")]
    InvalidTolerance(f64),

    #[error("sample count must be at least 2, got {0}")]
    InvalidSamples(usize),
}
