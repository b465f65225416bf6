use thiserror::Error;

/// Errors raised by the library.
///
/// The variants fall in two groups: input validation (bad parameters,
/// malformed files, out-of-domain arguments) and numeric failure (hazard
/// divergence, explosion, absolute-continuity violations). The CLI maps the
/// first group to exit code 1 and the second to exit code 2, see
/// [`Error::is_numeric`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("{what} = {value} is outside the domain {domain}")]
    Domain { what: &'static str, value: f64, domain: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("hazard inconsistent with observed data in waiting time #{index}: {reason}")]
    InconsistentHazard { index: usize, reason: String },

    #[error("explosion guard: more than {limit} events before t = {time}")]
    Explosion { limit: usize, time: f64 },

    #[error("absolute continuity violated: transition {from} -> {to} has reference probability 0")]
    AbsoluteContinuity { from: usize, to: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite log-likelihood at the initial point")]
    NonFiniteLikelihood,

    #[error("compensator is flat between events at {0} and {1}")]
    FlatCompensator(f64, f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn domain(what: &'static str, value: f64, domain: impl Into<String>) -> Self {
        Error::Domain { what, value, domain: domain.into() }
    }

    /// True for failures of the numerics rather than of the input format.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::InconsistentHazard { .. }
                | Error::Explosion { .. }
                | Error::AbsoluteContinuity { .. }
                | Error::NonFiniteLikelihood
                | Error::FlatCompensator(..)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
