use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the geometric and lattice operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: dimension mismatch, out-of-range parameter, bad JSON field.
    #[error("input error: {0}")]
    Input(String),

    /// A cutting plane misses the body, so the requested cap is empty.
    #[error("empty cap: plane offset {offset} is not below the support value {support}")]
    EmptyCap { offset: f64, support: f64 },

    /// Rejection sampling exhausted its proposal budget.
    #[error("sampling failure: acceptance rate {acceptance:.2e} after {proposals} proposals")]
    SamplingFailure { acceptance: f64, proposals: usize },

    /// The representation does not support the requested exact operation.
    #[error("unsupported representation for {0}")]
    UnsupportedRepresentation(&'static str),

    /// An operation's stated precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A covering failed verification where a verified one was required.
    #[error("covering verification failed: {0}")]
    VerificationFailed(String),

    /// Exact enumeration refused: instance exceeds the desk-scale budget.
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    /// JSON (de)serialization error.
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
