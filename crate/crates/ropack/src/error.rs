/// Errors produced across the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Malformed inputs: dimension mismatches, out-of-range indices,
    /// variant violations, references to absent packing options.
    #[error("structural error: {0}")]
    Structural(String),

    /// A generator or exact solver refused an input that exceeds its
    /// supported size.
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    /// Inconsistent generator or harness parameters.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A solver failed internally (e.g. the simplex cycling guard fired).
    /// Never used to report a merely suboptimal answer.
    #[error("internal error: {0}")]
    Internal(String),

    /// File or JSON handling failed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
}
