use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid state component `{name}` = {value}: {reason}")]
    InvalidState {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("kill-rate index must be 1, 2 or 5, got {0}")]
    InvalidKillIndex(u8),

    #[error("unknown parameter key `{0}`")]
    UnknownKey(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("polynomial has a zero leading coefficient")]
    ZeroLeadingCoefficient,

    #[error("polynomial degree {0} unsupported (1..=4)")]
    UnsupportedDegree(usize),

    #[error("Newton refinement did not converge in {iterations} iterations (last residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,

    #[error("state lies on a Heaviside switching surface ({0})")]
    NonSmoothPoint(String),

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("non-finite right-hand side at t = {t}")]
    NonFinite { t: f64 },

    #[error("too many switch events ({count}) before t = {t}")]
    Chattering { count: usize, t: f64 },

    #[error("unknown artifact kind `{0}`")]
    UnknownArtifact(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (solver, Newton, eigen) as opposed to
    /// bad input. The CLI maps these to exit status 1 and everything else to 2.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NewtonDivergence { .. }
                | Error::EigenFailure
                | Error::NonSmoothPoint(_)
                | Error::StepSizeUnderflow { .. }
                | Error::NonFinite { .. }
                | Error::Chattering { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
