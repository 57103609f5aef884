use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors shared by every module of the laboratory.
///
/// The CLI maps [`Error::Violation`] to exit code 1 and every other variant to
/// exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported derivative order {order} (maximum is {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("infeasible exponent tuple: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no crossing of the balance functions below h = {h_max} at x = {x}")]
    NoCrossing { x: f64, h_max: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("trajectory diverged at step {step}")]
    Divergence { step: usize },

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error("invariant violated: {0}")]
    Violation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parameter(format!("json: {e}"))
    }
}
