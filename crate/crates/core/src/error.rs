use thiserror::Error;

/// Errors raised by the toolkit. Every variant carries enough context to
/// name the offending input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("undefined extended-real operation: (+inf) + (-inf)")]
    UndefinedSum,
    #[error("capability not supported: {0}")]
    Capability(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("solver failed to converge: {0}")]
    Convergence(String),
    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn capability(msg: impl Into<String>) -> Error {
    Error::Capability(msg.into())
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            found,
        })
    }
}
