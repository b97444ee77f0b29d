use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported order h = {0} (supported: 2, 3, 4)")]
    UnsupportedOrder(u32),

    #[error("count overflow: {0}")]
    Overflow(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    /// The requested evaluation is larger than the configured enumeration cap.
    #[error("refused: {what} exceeds the cap of {cap}; {hint}")]
    CapExceeded {
        what: String,
        cap: u64,
        hint: String,
    },

    #[error("variable t_{0} has no probability in the variable space")]
    UnpricedVariable(u32),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid coupled-sum case id {0} (expected 1..=6)")]
    InvalidCase(u8),

    #[error("divergent configuration: {0}")]
    Divergent(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A stored result disagrees with a recomputation.
    #[error("revalidation failed: {0}")]
    Revalidation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
