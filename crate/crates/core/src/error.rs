use thiserror::Error;

/// Errors raised by distribution construction, region evaluation and the
/// protocol simulators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),

    #[error("variable set must not be empty")]
    EmptyVariableSet,

    #[error("table has {actual} entries, expected {expected}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("negative mass {value} at flat index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("mass sum {sum} differs from 1 by more than {tolerance}")]
    MassSum { sum: f64, tolerance: f64 },

    #[error("conditional row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },

    #[error("cardinality of `{name}` is {actual}, expected {expected}")]
    CardinalityMismatch {
        name: String,
        expected: usize,
        actual: usize,
    },

    #[error("factor conditions on `{0}` which is not available yet")]
    DanglingGiven(String),

    #[error("zero cardinality for variable `{0}`")]
    ZeroCardinality(String),

    #[error("table size {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("receiver output kernels differ by {0}, cannot merge")]
    KernelsDiffer(f64),

    #[error("joint is inconsistent with the channel: {0}")]
    InconsistentJoint(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("search budget must be positive")]
    ZeroBudget,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("codebook of {words} words x {n} symbols exceeds the memory cap")]
    CodebookTooLarge { words: usize, n: usize },

    #[error("typical set of {size} words exceeds the memory cap")]
    TypicalSetTooLarge { size: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
