use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside its mathematical domain.
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    /// Malformed arguments: lengths, lattice shapes, counts.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The circulant embedding produced an eigenvalue below the clamp tolerance.
    #[error("circulant embedding failed: eigenvalue {index} = {value:e} below -{tolerance:e}")]
    EmbeddingFailure {
        index: usize,
        value: f64,
        tolerance: f64,
    },
    /// A precondition of one of the bound terms does not hold.
    #[error("precondition failed for {term}: {detail}")]
    Precondition { term: String, detail: String },
    /// Numerical breakdown (non-PSD covariance, non-finite values).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn precondition(term: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precondition {
            term: term.into(),
            detail: detail.into(),
        }
    }

    /// True for failures of the bound calculus (as opposed to bad input).
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::Precondition { .. })
    }
}
