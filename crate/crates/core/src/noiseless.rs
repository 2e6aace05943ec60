//! Noiseless attenuation `√T^N̂` and noiseless amplification `G^N̂` at the
//! covariance-matrix level.
//!
//! Both filters are Gaussian. With `σ = (Σ + I)⁻¹` (the Q-function
//! kernel) the filter with amplitude scale `s` rescales the target mode's
//! diagonal block to `s²(σ₁ − ½I) + ½I` and the cross blocks by `s`; the
//! filtered state is `σ̃⁻¹ − I`. For block-form states the 4x4 inverses
//! collapse to scalar algebra on `(a, b, c)`.

use crate::error::{Error, Result};
use crate::gaussian::{Mode, TwoModeCM, PHYSICALITY_TOL};

/// Relative margin kept below the amplifier gain bound.
pub const GAIN_BOUND_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Attenuation,
    Amplification,
}

/// A heralded noiseless filter acting on one arm of one supermode pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiselessOp {
    pub kind: OpKind,
    /// `T ∈ (0, 1]` for attenuation, `G ≥ 1` for amplification.
    pub strength: f64,
    pub target: Mode,
    /// Zero-based supermode index the operation is placed on.
    pub supermode: usize,
}

impl NoiselessOp {
    pub fn attenuation(transmissivity: f64, target: Mode, supermode: usize) -> Result<Self> {
        let op = Self {
            kind: OpKind::Attenuation,
            strength: transmissivity,
            target,
            supermode,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn amplification(gain: f64, target: Mode, supermode: usize) -> Result<Self> {
        let op = Self {
            kind: OpKind::Amplification,
            strength: gain,
            target,
            supermode,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            OpKind::Attenuation if !(self.strength > 0.0 && self.strength <= 1.0) => {
                Err(Error::Domain(format!(
                    "attenuation transmissivity must lie in (0, 1], got {}",
                    self.strength
                )))
            }
            OpKind::Amplification if !(self.strength >= 1.0) || !self.strength.is_finite() => {
                Err(Error::Domain(format!(
                    "amplification gain must be finite and >= 1, got {}",
                    self.strength
                )))
            }
            _ => Ok(()),
        }
    }

    /// Amplitude scale applied per photon: `√T` or `G`.
    pub fn amplitude_scale(&self) -> f64 {
        match self.kind {
            OpKind::Attenuation => self.strength.sqrt(),
            OpKind::Amplification => self.strength,
        }
    }

    /// True when the operation leaves every state unchanged.
    pub fn is_identity(&self) -> bool {
        self.strength == 1.0
    }
}

/// Largest admissible amplifier gain for a mode of a given variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainLimit {
    /// `G` must stay strictly below this value.
    Below(f64),
    /// Vacuum input: any finite gain keeps the state physical.
    Unbounded,
}

impl GainLimit {
    pub fn admits(&self, gain: f64) -> bool {
        match *self {
            GainLimit::Below(limit) => gain < limit * (1.0 - GAIN_BOUND_MARGIN),
            GainLimit::Unbounded => gain.is_finite(),
        }
    }

    /// The largest gain strictly inside the margin, capped at `cap`.
    pub fn usable(&self, cap: f64) -> f64 {
        match *self {
            GainLimit::Below(limit) => (limit * (1.0 - 2.0 * GAIN_BOUND_MARGIN)).min(cap),
            GainLimit::Unbounded => cap,
        }
    }
}

/// `G_max = √((V + 1)/(V − 1))`.
pub fn max_gain(variance: f64) -> GainLimit {
    if variance <= 1.0 {
        return GainLimit::Unbounded;
    }
    GainLimit::Below(((variance + 1.0) / (variance - 1.0)).sqrt())
}

/// Heralding probability `G^(−2⌈n̄⌉)` of the amplifier.
pub fn success_probability(gain: f64, mean_photons: f64) -> f64 {
    let n = mean_photons.max(0.0).ceil();
    if n == 0.0 || gain == 1.0 {
        return 1.0;
    }
    gain.powf(-2.0 * n)
}

pub fn apply_noiseless_op(cm: &TwoModeCM, op: &NoiselessOp) -> Result<TwoModeCM> {
    op.validate()?;
    if op.is_identity() {
        return Ok(*cm);
    }
    if op.kind == OpKind::Amplification {
        let variance = cm.variance(op.target);
        let limit = max_gain(variance);
        if !limit.admits(op.strength) {
            let GainLimit::Below(limit) = limit else {
                unreachable!("unbounded limit admits every finite gain")
            };
            return Err(Error::GainBound {
                gain: op.strength,
                limit,
                variance,
            });
        }
    }

    let s = op.amplitude_scale();
    let (a, b, c) = (cm.a(), cm.b(), cm.c());

    // σ = (Σ + I)⁻¹ in block form: diag blocks p (mode A), q (mode B),
    // cross block w·Z.
    let det = (a + 1.0) * (b + 1.0) - c * c;
    if !(det > 0.0) {
        return Err(Error::Numerical(format!(
            "Σ + I is singular for (a={a}, b={b}, c={c})"
        )));
    }
    let mut p = (b + 1.0) / det;
    let mut q = (a + 1.0) / det;
    let w = -c / det;

    match op.target {
        Mode::A => p = s * s * (p - 0.5) + 0.5,
        Mode::B => q = s * s * (q - 0.5) + 0.5,
    }
    let w = s * w;

    let det_tilde = p * q - w * w;
    if !(det_tilde > 0.0) || !det_tilde.is_finite() {
        return Err(Error::Numerical(format!(
            "filtered Q-function kernel is singular (det = {det_tilde})"
        )));
    }
    let out = TwoModeCM::new_unchecked(q / det_tilde - 1.0, p / det_tilde - 1.0, -w / det_tilde);
    if out.a() < 1.0 - PHYSICALITY_TOL || out.b() < 1.0 - PHYSICALITY_TOL {
        return Err(Error::NonPhysical(format!(
            "filter produced sub-vacuum variances (a={}, b={})",
            out.a(),
            out.b()
        )));
    }
    Ok(out)
}
