use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precision {0} is out of range [3, 26]")]
    InvalidPrecision(u32),

    #[error("cannot merge a sketch of precision {src} into a sketch of precision {dst}")]
    PrecisionMismatch { dst: u32, src: u32 },

    #[error("decode error at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("ML solver did not converge, last bracket [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid simulation plan: {0}")]
    InvalidPlan(String),
}

pub type Result<T> = std::result::Result<T, Error>;
