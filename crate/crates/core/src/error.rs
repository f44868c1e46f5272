use thiserror::Error;

/// Errors produced by the sampler, the exact engine and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("chain diverged in replica {replica} at step {step}")]
    DivergedChain {
        replica: usize,
        step: u64,
        position: Vec<f64>,
        velocity: Vec<f64>,
    },

    #[error("unstable parameters: {0}")]
    UnstableParameters(String),

    #[error("schedule undefined: {0}")]
    ScheduleUndefined(String),

    #[error("unsupported target: {0}")]
    UnsupportedTarget(String),

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DivergedChain { .. } | Error::UnstableParameters(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
