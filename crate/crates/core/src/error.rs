use thiserror::Error;

/// Errors produced by histogram, polytope and kernel operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("total masses differ: {row} vs {col}")]
    MassMismatch { row: u64, col: u64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("enumeration budget of {limit} tables exceeded")]
    BudgetExceeded { limit: u64 },

    #[error("instance too large: {what} = {value}, maximum {max}")]
    TooLarge {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("index {index} outside alphabet 1..={alphabet}")]
    IndexOutOfRange { index: usize, alphabet: usize },

    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),

    #[error("matrix is not symmetric (max relative asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("requested {requested} permutations but only {available} exist")]
    SizeTarget { requested: u64, available: u64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("histogram {index}: {source}")]
    Dataset {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("kernel evaluation failed at ({p}, {q}): {source}")]
    Kernel {
        p: usize,
        q: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
