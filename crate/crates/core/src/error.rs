use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("`{name}` must lie strictly inside (0, 1), got {value}")]
    Probability { name: &'static str, value: f64 },

    #[error("`{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("observational cell (t={t}, x={x}) has zero probability mass")]
    DegenerateCell { t: u8, x: u8 },

    #[error("log odds undefined for probability {value}")]
    LogitDomain { value: f64 },

    #[error("model has no free coefficient")]
    NoFreeCoefficient,

    #[error("weights must be non-negative and sum to 1, got sum {sum}")]
    Weights { sum: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("closed form requires an Example-1 shaped mechanism: {0}")]
    NotExample1(&'static str),

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}
