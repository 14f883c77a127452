use thiserror::Error;

/// Errors produced by the shaping, channel-model and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported QAM order {0}: expected a power of four between 4 and 4096")]
    InvalidOrder(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("constellation has zero mean power")]
    ZeroPower,

    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constellation is not normalized to unit power (mean power {0})")]
    NotNormalized(f64),

    #[error("nonpositive SNR bracket 1 + c*K = {bracket} for kurtosis {kurtosis} (c = {c})")]
    NonPositiveBracket { kurtosis: f64, c: f64, bracket: f64 },

    #[error("optimizer did not converge after {iterations} iterations (best MI {best_mi} at {best_params:?})")]
    NonConvergence {
        iterations: usize,
        best_mi: f64,
        best_params: Vec<f64>,
    },

    #[error("invalid link configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite field after propagation; increase the number of split steps")]
    NonFiniteField,

    #[error("not enough symbols: need at least {needed}, got {got}")]
    TooFewSymbols { needed: usize, got: usize },

    #[error("no measurable NLI: {0}")]
    NoMeasurableNli(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}
