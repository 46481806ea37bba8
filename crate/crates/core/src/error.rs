use thiserror::Error;

use crate::bell::BellIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is outside the supported range {min}..={max}", min = crate::MIN_DIM, max = crate::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("radix {0} is invalid, every tensor factor needs at least two levels")]
    InvalidRadix(usize),

    #[error("index ({first}, {second}) is out of range for dimension {d}")]
    IndexOutOfRange { d: usize, first: usize, second: usize },

    #[error("expected {expected} amplitudes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("tensor factor {factor} does not exist in a {factors}-factor basis")]
    FactorOutOfRange { factor: usize, factors: usize },

    #[error("operator of dimension {operator} cannot act on a factor of radix {radix}")]
    DimensionMismatch { operator: usize, radix: usize },

    #[error("phase sign must be +1 or -1, got {0}")]
    InvalidSign(i8),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("matrix is not unitary (max deviation of U†U from identity: {0:e})")]
    NotUnitary(f64),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("no clock/shift monomial prepares Bell state {0:?}")]
    CalibrationFailure(BellIndex),

    #[error("decomposition supports are not affine in (k, i)")]
    NoAffineLaw,

    #[error("coefficient phase {phase} rad is not a {d}-th root of unity")]
    PhaseNotRootOfUnity { phase: f64, d: usize },

    #[error("no sign convention reproduces the claimed index law in dimension {0}")]
    NoneMatch(usize),

    #[error("dimension 2 cannot discriminate phase conventions")]
    DegenerateDimension,

    #[error("expected one decomposition table per Bell index ({expected}), got {actual}")]
    IncompleteTables { expected: usize, actual: usize },

    #[error("outcome claimed by both {first:?} and {second:?}")]
    Collision { first: BellIndex, second: BellIndex },

    #[error("invalid probability table: {0}")]
    InvalidProbability(String),

    #[error("shot count must be at least 1")]
    NoShots,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
