use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RaagError {
    /// Malformed input: bad graph file, unknown vertex, invalid word, broken certificate.
    #[error("input error: {0}")]
    Input(String),
    /// The defining graph does not satisfy the hypotheses an operation relies on.
    #[error("hypothesis error: {0}")]
    Hypothesis(String),
    /// A configured enumeration cap was reached.
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, RaagError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(RaagError::Input(msg.into()))
}
