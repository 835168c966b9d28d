//! Crate-wide error type.

use std::fmt;

use crate::solver::SolveReport;

/// Error raised by any operation in the crate.
#[derive(Debug)]
pub enum Error {
    /// A caller-supplied argument is outside the documented domain.
    InvalidArgument(String),
    /// A generator, parameter set, or input table fails structural validation.
    Validation(String),
    /// A bracket or iteration left the representable range.
    Range(String),
    /// The requested case is recognized but deliberately not handled
    /// (for example the non-reflexive index `ell = 1`).
    Unsupported(String),
    /// A documented precondition of the operation does not hold.
    Precondition(String),
    /// A configured resource cap (node count, subdivision depth) was hit.
    Resource(String),
    /// An iterative solve failed; carries whatever diagnostics were
    /// accumulated before the failure.
    NonConvergence {
        message: String,
        report: Option<SolveReport>,
    },
    /// Invariant violation that indicates a bug rather than bad input.
    Internal(String),
    /// Config-file parsing failure; the message names the offending key.
    Parse(String),
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable code, used by the harness error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Validation(_) => "validation",
            Error::Range(_) => "range",
            Error::Unsupported(_) => "unsupported",
            Error::Precondition(_) => "precondition",
            Error::Resource(_) => "resource",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Internal(_) => "internal",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::Validation(m) => write!(f, "validation failed: {m}"),
            Error::Range(m) => write!(f, "out of range: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported case: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Resource(m) => write!(f, "resource cap exceeded: {m}"),
            Error::NonConvergence { message, .. } => write!(f, "did not converge: {message}"),
            Error::Internal(m) => write!(f, "internal error: {m}"),
            Error::Parse(m) => write!(f, "config parse error: {m}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
