use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("t = {t} is not a grid node")]
    NotOnGrid { t: f64 },

    #[error("window 1/{m} is not aligned with a grid of {intervals} intervals")]
    MisalignedWindow { m: usize, intervals: usize },

    #[error("rejection budget of {budget} proposals exhausted")]
    SamplingBudget { budget: u64 },

    #[error("fiber at y = {y:?} is empty within the sampling budget")]
    EmptyFiber { y: Vec<f64> },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
