//! Reverse-reconciliation key rates for heterodyne detection.
//!
//! For a supermode pair with covariance `(x, y, z)` at Bob's detector:
//!
//! * `I(A:B) = log₂[(x+1)(y+1) / ((x+1)(y+1) − z²)]`
//! * `χ(E:B) = g(α₁) + g(α₂) − g(α₃)`, with `α₁, α₂` the symplectic
//!   eigenvalues of the joint state and `α₃ = x − z²/(y+1)` that of Alice's
//!   mode conditioned on Bob's heterodyne outcome
//! * `R_k = P_k·[ξ·I − χ]`, summed over supermodes.

use std::f64::consts::LN_2;

use crate::channel::{apply_channel, ChannelParams};
use crate::error::{Error, Result};
use crate::gaussian::{
    epr_cm, mean_photon_number, symplectic_eigenvalues, SupermodeSpectrum, TwoModeCM,
    PHYSICALITY_TOL,
};
use crate::noiseless::{apply_noiseless_op, success_probability, NoiselessOp, OpKind};

/// Default reverse-reconciliation efficiency.
pub const DEFAULT_XI: f64 = 0.95;
/// Default channel input excess noise (SNU).
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Source pulse rate used to convert bits/pulse into bits/second.
pub const PULSE_RATE_HZ: f64 = 76e6;

/// `I(A:B)` in bits per pulse.
pub fn mutual_information(cm: &TwoModeCM) -> Result<f64> {
    let (x, y, z) = (cm.a(), cm.b(), cm.c());
    let prod = (x + 1.0) * (y + 1.0);
    let z2 = z * z;
    if !(prod > z2) {
        return Err(Error::NonPhysical(format!(
            "(x+1)(y+1) = {prod} does not exceed z^2 = {z2}"
        )));
    }
    // log₂(prod / (prod − z²)) = −log₂(1 − z²/prod)
    Ok(-(-z2 / prod).ln_1p() / LN_2)
}

/// Symplectic eigenvalue `α₃ = x − z²/(y + 1)` of Alice's mode conditioned
/// on a heterodyne measurement of Bob's mode.
pub fn conditional_cm(cm: &TwoModeCM) -> Result<f64> {
    let (x, y, z) = (cm.a(), cm.b(), cm.c());
    let alpha3 = x - z * z / (y + 1.0);
    if alpha3 < 1.0 - PHYSICALITY_TOL {
        return Err(Error::NonPhysical(format!(
            "conditional variance {alpha3} is below the vacuum level"
        )));
    }
    Ok(alpha3)
}

/// Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue
/// `nu`: `g(ν) = ((ν+1)/2)log₂((ν+1)/2) − ((ν−1)/2)log₂((ν−1)/2)`.
pub fn thermal_entropy(nu: f64) -> Result<f64> {
    if nu < 1.0 - PHYSICALITY_TOL || nu.is_nan() {
        return Err(Error::NonPhysical(format!(
            "symplectic eigenvalue {nu} is below 1"
        )));
    }
    let n = 0.5 * (nu - 1.0);
    if n <= 0.0 {
        return Ok(0.0);
    }
    Ok(((n + 1.0) * n.ln_1p() - n * n.ln()) / LN_2)
}

/// Eve's Holevo information on Bob's heterodyne outcome (bits per pulse).
pub fn holevo_bound(cm: &TwoModeCM) -> Result<f64> {
    let nu = symplectic_eigenvalues(cm)?;
    let alpha3 = conditional_cm(cm)?;
    Ok(thermal_entropy(nu.nu1)? + thermal_entropy(nu.nu2)? - thermal_entropy(alpha3)?)
}

/// Rate contribution of one supermode pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubchannelRate {
    /// Zero-based supermode index.
    pub k: usize,
    pub mutual_information: f64,
    pub holevo: f64,
    pub success_probability: f64,
    /// `P·(ξ·I − χ)`, possibly negative.
    pub rate: f64,
}

pub fn subchannel_rate(cm: &TwoModeCM, xi: f64, probability: f64) -> Result<SubchannelRate> {
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::Domain(format!(
            "reconciliation efficiency must lie in (0, 1], got {xi}"
        )));
    }
    if !(probability > 0.0 && probability <= 1.0) {
        return Err(Error::Domain(format!(
            "success probability must lie in (0, 1], got {probability}"
        )));
    }
    let info = mutual_information(cm)?;
    let chi = holevo_bound(cm)?;
    Ok(SubchannelRate {
        k: 0,
        mutual_information: info,
        holevo: chi,
        success_probability: probability,
        rate: probability * (xi * info - chi),
    })
}

/// How per-supermode rates combine into the total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// `Σ R_k`, negative contributions included.
    #[default]
    Sum,
    /// `Σ max(R_k, 0)`: unprofitable supermodes are discarded.
    ClampNegative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateBreakdown {
    pub per_subchannel: Vec<SubchannelRate>,
    /// Total key rate in bits per pulse.
    pub total: f64,
}

impl KeyRateBreakdown {
    pub fn bits_per_second(&self) -> f64 {
        self.total * PULSE_RATE_HZ
    }
}

/// Full protocol description: source spectrum, optional heralded filters
/// and the post-processing parameters. The channel transmissivity is
/// supplied per evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub spectrum: SupermodeSpectrum,
    /// Channel input excess noise, identical on every supermode.
    pub epsilon: f64,
    pub xi: f64,
    /// Noiseless attenuation at the transmitter (acts on beam B before the
    /// channel).
    pub attenuation: Option<NoiselessOp>,
    /// Noiseless amplification at the receiver.
    pub amplification: Option<NoiselessOp>,
    pub aggregation: Aggregation,
}

impl Protocol {
    /// Protocol without filters using the default `ε` and `ξ`.
    pub fn baseline(spectrum: SupermodeSpectrum) -> Self {
        Self {
            spectrum,
            epsilon: DEFAULT_EPSILON,
            xi: DEFAULT_XI,
            attenuation: None,
            amplification: None,
            aggregation: Aggregation::Sum,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.spectrum.len();
        ChannelParams::new(1.0, self.epsilon)?;
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return Err(Error::Domain(format!(
                "reconciliation efficiency must lie in (0, 1], got {}",
                self.xi
            )));
        }
        for (op, kind) in [
            (&self.attenuation, OpKind::Attenuation),
            (&self.amplification, OpKind::Amplification),
        ] {
            if let Some(op) = op {
                op.validate()?;
                if op.kind != kind {
                    return Err(Error::Domain(format!(
                        "{kind:?} slot holds a {:?} operation",
                        op.kind
                    )));
                }
                if op.supermode >= k {
                    return Err(Error::Domain(format!(
                        "operation placed on supermode {} but only {k} exist",
                        op.supermode + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total key rate through a channel of transmissivity `eta`.
    pub fn total_rate(&self, eta: f64) -> Result<KeyRateBreakdown> {
        let channel = ChannelParams::new(eta, self.epsilon)?;
        let mut per_subchannel = Vec::with_capacity(self.spectrum.len());
        for (k, r) in self.spectrum.squeezing().enumerate() {
            per_subchannel.push(self.supermode_rate(k, r, &channel)?);
        }
        let total = match self.aggregation {
            Aggregation::Sum => per_subchannel.iter().map(|s| s.rate).sum(),
            Aggregation::ClampNegative => per_subchannel.iter().map(|s| s.rate.max(0.0)).sum(),
        };
        Ok(KeyRateBreakdown {
            per_subchannel,
            total,
        })
    }

    fn supermode_rate(&self, k: usize, r: f64, channel: &ChannelParams) -> Result<SubchannelRate> {
        let mut cm = epr_cm(r)?;
        if let Some(op) = self.attenuation.as_ref().filter(|op| op.supermode == k) {
            cm = apply_noiseless_op(&cm, op)?;
        }
        cm = apply_channel(&cm, channel);
        let mut probability = 1.0;
        if let Some(op) = self.amplification.as_ref().filter(|op| op.supermode == k) {
            let n = mean_photon_number(cm.variance(op.target))?;
            probability = success_probability(op.strength, n);
            cm = apply_noiseless_op(&cm, op)?;
        }
        let mut rate = subchannel_rate(&cm, self.xi, probability)?;
        rate.k = k;
        Ok(rate)
    }
}

/// Free-function form of [`Protocol::total_rate`].
pub fn total_rate(protocol: &Protocol, eta: f64) -> Result<KeyRateBreakdown> {
    protocol.total_rate(eta)
}
