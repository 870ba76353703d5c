use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is composite")]
    CompositeModulus(u64),

    #[error("requires {required} bytes, budget is {budget}")]
    TooLarge { required: u64, budget: u64 },

    #[error("direct enumeration of {terms} terms exceeds budget {budget}")]
    DimensionTooLarge { terms: u128, budget: u64 },

    #[error("limit {limit} exceeds available range {available}")]
    RangeMismatch { limit: u64, available: u64 },

    #[error("degenerate twist: {0}")]
    DegenerateTwist(String),

    #[error("twist exponent r must be nonzero")]
    ZeroExponent,

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("no even ell in [2, {0}] satisfies the window p^(1/2+2/ell) <= N")]
    NoFeasibleEll(u32),

    #[error("bound must be positive, got {0}")]
    NonpositiveBound(f64),

    #[error("weight |alpha_{index}| = {abs} exceeds 1")]
    WeightExceedsUnit { index: usize, abs: f64 },

    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
