use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("row {row} of the transition matrix sums to {sum}, not 1")]
    NonStochasticRow { row: usize, sum: f64 },
    #[error("invalid matrix entry at ({row}, {col}): {value}")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("transition matrix is not of full row rank (smallest singular value {min_singular:e})")]
    RankDeficient { min_singular: f64 },
    #[error("single-symbol denoiser set has {size} members, cap is {cap}")]
    SetTooLarge { size: u128, cap: usize },
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("symbol {symbol} is outside an alphabet of size {size}")]
    SymbolOutOfAlphabet { symbol: usize, size: usize },
    #[error("position {position} has an incomplete context of order {k} in a sequence of length {n}")]
    BoundaryViolation { position: usize, k: usize, n: usize },
    #[error("sequence of length {n} is too short for context order {k}")]
    SequenceTooShort { n: usize, k: usize },
    #[error("more than {cap} distinct contexts")]
    TooManyContexts { cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no positions to evaluate")]
    EmptyEvaluation,
    #[error("delta must be positive")]
    ZeroDelta,
    #[error("confidence parameter {0} is not in (0, 1)")]
    InvalidDelta(f64),
    #[error("margin parameter {0} must be positive")]
    InvalidGamma(f64),
    #[error("probability {0} is not in (0, 1)")]
    InvalidProbability(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
