use thiserror::Error;

/// Errors produced by the analysis chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("instantaneous frequency {omega:.3} rad/s at t = {time_s:.6} s leaves the band (0, {limit:.3}) rad/s")]
    FrequencyOutOfBand { time_s: f64, omega: f64, limit: f64 },

    #[error("signal grids differ: {0}")]
    GridMismatch(String),

    #[error("signal has {len} samples but the window needs {needed}")]
    SignalTooShort { len: usize, needed: usize },

    #[error("grid has no energy; {0} is undefined")]
    ZeroEnergy(&'static str),

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
