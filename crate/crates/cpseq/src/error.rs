//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Error)]
pub enum Error {
    /// Requested series degree exceeds the configured cap.
    #[error("series degree {degree} exceeds cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },

    /// Two series of different truncation degrees were combined.
    #[error("series degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    /// A recursive constructor was asked to exceed its depth cap.
    #[error("recursion level {level} exceeds cap {cap}")]
    RecursionCap { level: usize, cap: usize },

    /// A family phase formula produced an arccos argument outside [-1, 1].
    #[error("phase unsolvable: arccos argument {0} outside [-1, 1]")]
    PhaseUnsolvable(f64),

    /// A series was expected to start at a given target but does not.
    #[error("series does not start at the target: distance {0:.3e}")]
    NotAtTarget(f64),

    /// Defect extraction produced an inconsistent generator.
    #[error("defect extraction failed: {0}")]
    DefectExtraction(String),

    /// The planar conjugator failed its verification residual bound.
    #[error("planar conjugator verification failed: residual {0:.3e}")]
    ConjugatorVerification(f64),

    /// The externally sourced base sequence failed its first-order oracle gate.
    #[error("base sequence not first-order compensating")]
    BaseNotCompensating,

    /// A constructed sequence failed its order verification.
    #[error("order verification failed: {0}")]
    OrderVerification(String),

    /// A constructor could not complete.
    #[error("construction failed: {0}")]
    Construction(String),

    /// Too few usable points above the noise floor for a direct-evaluation fit.
    #[error("below noise floor - use series oracle")]
    BelowNoiseFloor,

    /// A numeric solve could not bracket or reach its target.
    #[error("solve failed: {0}")]
    SolveFailed(String),

    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
