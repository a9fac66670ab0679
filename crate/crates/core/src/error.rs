//! Error type shared by every module.

use thiserror::Error;

/// Errors produced by piclab.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of the operands do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A table or sample set has no entries.
    #[error("empty input")]
    EmptyInput,
    /// A probability entry is negative or not finite.
    #[error("invalid probability {value} at ({row}, {col})")]
    InvalidProbability { row: usize, col: usize, value: f64 },
    /// Total mass is farther from one than the renormalization tolerance.
    #[error("total mass {0} is not 1")]
    NotNormalized(f64),
    /// A row of the joint table carries no mass.
    #[error("row {0} has zero mass")]
    ZeroMassRow(usize),
    /// A column of the joint table carries no mass.
    #[error("column {0} has zero mass")]
    ZeroMassColumn(usize),
    /// A vector is not a probability mass function.
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    /// `p` has mass where `q` has none.
    #[error("support mismatch at index {0}")]
    SupportMismatch(usize),
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    DomainError(String),
    /// Function is constant under `p_X`.
    #[error("function has zero variance")]
    DegenerateFunction,
    /// Requested index exceeds the available range.
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    /// Input vector is required to be sorted in non-increasing order.
    #[error("input must be sorted in non-increasing order")]
    UnsortedInput,
    /// The joint distribution is not conforming.
    #[error("joint distribution is not conforming")]
    NotConforming,
    /// Length is not a power of two.
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    /// The operation assumes a uniform input distribution.
    #[error("uniform input distribution required")]
    UniformityRequired,
    /// `t` lies outside `[0, H(X)]`.
    #[error("t = {t} outside [0, {max}]")]
    TOutOfRange { t: f64, max: f64 },
    /// Target mass for a bilinear witness is not attainable.
    #[error("mass {0} not attainable")]
    InfeasibleMass(f64),
    /// Exhaustive enumeration would exceed the work cap.
    #[error("enumeration of {count} candidates exceeds cap {cap}")]
    TooLarge { count: f64, cap: f64 },
    /// An iterative method did not converge.
    #[error("no convergence after {0} iterations")]
    NonConvergence(usize),
    /// Leading singular value disagrees with 1.
    #[error("leading singular value {0} differs from 1")]
    InconsistentDecomposition(f64),
    /// Floating point breakdown.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_) | Error::InconsistentDecomposition(_) | Error::NumericalFailure(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

/// Result alias.
pub type Result<T> = std::result::Result<T, Error>;
