//! Thermal-loss sub-channel acting on Bob's arm.

use crate::error::{Error, Result};
use crate::gaussian::TwoModeCM;

/// Transmissivity `η ∈ [0, 1]` and input-referred excess noise `ε ≥ 0`
/// (shot-noise units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    eta: f64,
    epsilon: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!(
                "transmissivity must lie in [0, 1], got {eta}"
            )));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Domain(format!(
                "excess noise must be finite and non-negative, got {epsilon}"
            )));
        }
        Ok(Self { eta, epsilon })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `(a, b, c) → (a, η(b + ε) + 1 − η, √η·c)`.
pub fn apply_channel(cm: &TwoModeCM, params: &ChannelParams) -> TwoModeCM {
    let eta = params.eta;
    TwoModeCM::new_unchecked(
        cm.a(),
        eta * (cm.b() + params.epsilon) + (1.0 - eta),
        eta.sqrt() * cm.c(),
    )
}
