use thiserror::Error;

/// Errors raised by the simulators, estimators and closed-form evaluators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("replication on stream {stream_index} failed: {source}")]
    Replication {
        stream_index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("coupling order violated at t={time}: {detail}")]
    CouplingViolation { time: f64, detail: String },

    #[error("truncation level too small: tail tolerance needs z_max >= {required}")]
    InsufficientTruncation { required: usize },

    #[error("parameters are in a transient regime: {0}")]
    TransientRegime(String),

    #[error("process did not go extinct before the safety horizon {horizon}")]
    NotExtinct { horizon: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

/// Checks that `value` is finite and strictly positive.
pub(crate) fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {value}")))
    }
}
