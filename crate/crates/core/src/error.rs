use thiserror::Error;

/// Errors raised anywhere in the coloring pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("entry ({row}, {col}) has |value| = {value} > 1")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("index ({row}, {col}) out of bounds for a {m}x{n} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        m: usize,
        n: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("retry budget exhausted: {0}")]
    RetryExhausted(String),

    #[error("all weights are zero")]
    AllZeroWeights,

    #[error("negative weight {0}")]
    NegativeWeight(f64),

    #[error("negative multiplier {0}")]
    NegativeMultiplier(f64),

    #[error("leaf index {index} out of bounds for {size} leaves")]
    LeafOutOfBounds { index: usize, size: usize },

    #[error("squared norm {0} exceeds 1")]
    NormExceeded(f64),

    #[error("epsilon {0} is not in (0, 1)")]
    InvalidEpsilon(f64),

    #[error("reduction vector norm {0} exceeds 1/2")]
    NormViolation(f64),

    #[error("expert weights do not sum to one (sum = {0})")]
    WeightInvariantViolation(f64),

    #[error("oracle failure budget exceeded after {0} failed calls")]
    OracleFailureBudgetExceeded(usize),

    #[error("no feasible level found in binary search")]
    NoFeasibleLevel,

    #[error("scaled point left the feasible polytope: {0}")]
    FeasibilityLost(String),

    #[error("self-balancing walk overflowed: |<w, a_i>| = {value} > {threshold}")]
    WalkOverflow { value: f64, threshold: f64 },

    #[error("instance too large for brute force: {0}")]
    TooLarge(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
