use thiserror::Error;

/// Errors produced by the inequality, classical and quantum routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site count {0} is outside the supported range {1}..={2}")]
    SiteCount(u32, u32, u32),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("table length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("bit string {bits:#b} has bits beyond site count {n}")]
    BitsOutOfRange { bits: u32, n: u32 },
    #[error("sign table entry {value} at index {index} is not +1 or -1")]
    InvalidSign { index: usize, value: i64 },
    #[error("coefficient table is not extremal (transform value {value} at r = {index})")]
    NotExtremal { index: usize, value: String },
    #[error("inequality id does not fit in 2^{n} bits")]
    IdOutOfRange { n: u32 },
    #[error("correlation entry {value} at index {index} lies outside [-1, 1]")]
    CorrelationOutOfRange { index: usize, value: f64 },
    #[error("invalid classical model: {0}")]
    InvalidModel(String),
    #[error("invalid permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("linear program solver failed: {0}")]
    Solver(String),
    #[error("Bell operator norm routes disagree: dense {dense} vs eigenvalue formula {formula}")]
    NormMismatch { dense: f64, formula: f64 },
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
