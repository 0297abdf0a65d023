use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("{name} = {value} is outside [{low}, {high}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("singular linear system with null-space dimension {null_dim}")]
    Singular { null_dim: usize },

    #[error("method not applicable: {0}")]
    NotApplicable(String),

    #[error("singular Fisher term at outcome {outcome}: p = {probability:e}, dp = {derivative:e}")]
    FisherSingularity {
        outcome: usize,
        probability: f64,
        derivative: f64,
    },

    #[error("sampling exhausted after {draws} draws with bin {bin} still short")]
    SamplingExhausted { bin: usize, draws: usize },

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("optimizer produced a non-finite cost at iteration {}", .0.iteration)]
    Divergence(Box<Divergence>),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Last valid iterate reported when training diverges.
#[derive(Debug, Clone)]
pub struct Divergence {
    pub iteration: usize,
    pub cost: f64,
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, low: f64, high: f64) -> Result<()> {
    if value.is_finite() && value >= low && value <= high {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            low,
            high,
        })
    }
}
