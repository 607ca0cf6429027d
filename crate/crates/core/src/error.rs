use thiserror::Error;

/// Errors produced by the sampling, spectrum, and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A realization hit an exact rank collapse (probability zero for the
    /// continuous ensembles; signals a numerical fault).
    #[error("degenerate realization: {0}")]
    DegenerateRealization(String),

    /// Standardization requested for an ensemble with zero log-variance
    /// (all truncations zero).
    #[error("degenerate variance: all truncations are zero")]
    DegenerateVariance,

    /// A bound formula is undefined for the given ensemble (division by the
    /// minimum truncation).
    #[error("undefined bound: {0}")]
    UndefinedBound(String),

    #[error("singular matching Gram matrix at k={k}, m={m} (residual {residual:.3e})")]
    SingularGram { k: usize, m: usize, residual: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
