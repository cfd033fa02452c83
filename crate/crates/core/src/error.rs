use thiserror::Error;

/// Errors produced by the model, engine, analysis and pricing layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("invalid forward curve: {0}")]
    InvalidCurve(String),

    #[error("invalid simulation config `{name}`: {reason}")]
    Config { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("the deterministic limit is only defined for gamma = 1 (got {0})")]
    UnsupportedGamma(f64),

    #[error("gamma = {0} is outside (1/2, 1]; for gamma <= 1/2 the process is non-explosive")]
    GammaOutOfRange(f64),

    #[error("every path exploded; no sample left to average")]
    EmptySample,

    #[error("bond price underflowed to zero (rates have exploded)")]
    CollapsedBond,

    #[error("no Lyapunov certificate: {0}")]
    InfeasibleWedge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn config(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Config {
        name,
        reason: reason.into(),
    }
}
