use thiserror::Error;

/// Errors raised by the state, channel and key-rate computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-physical state: {0}")]
    NonPhysical(String),

    #[error("amplifier gain {gain} violates the bound G < {limit} for input variance {variance}")]
    GainBound { gain: f64, limit: f64, variance: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("turbulence too strong for the elliptic-beam moments: {0}")]
    TurbulenceTooStrong(String),

    #[error("all transmissivity samples are zero: mean attenuation is infinite")]
    InfiniteAttenuation,

    #[error("feasibility predicate is not monotone over the bracketing scan: {0}")]
    NonMonotone(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
