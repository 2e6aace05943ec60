//! Elliptic-beam model of a satellite-to-ground downlink.
//!
//! Turbulence strength follows the Hufnagel-Valley `C²ₙ(h)` profile; the
//! Rytov variance and scintillation index feed the moments of the beam
//! parameters `{x, y, θ₁, θ₂}`, and each sampled beam is converted into a
//! transmissivity through a circular aperture of radius `r₀`.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::special::{i0e, i1e, integrate, lambert_w0_exp};

/// Relative tolerance of the Rytov-variance quadrature.
pub const RYTOV_REL_TOL: f64 = 1e-8;

/// Downlink geometry. Lengths in metres, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Satellite altitude `H`.
    pub altitude: f64,
    /// Ground-station altitude `h₀`.
    pub ground_altitude: f64,
    /// Zenith angle `ζ`.
    pub zenith: f64,
    pub wavelength: f64,
    /// Transmitter beam waist `W₀`.
    pub waist: f64,
    /// Receiver aperture radius `r₀`.
    pub aperture: f64,
}

impl LinkGeometry {
    /// 500 km pass at zenith, 795 nm, 6 cm waist, 1 m aperture.
    pub fn reference() -> Self {
        Self {
            altitude: 500e3,
            ground_altitude: 0.0,
            zenith: 0.0,
            wavelength: 795e-9,
            waist: 0.06,
            aperture: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("waist", self.waist),
            ("aperture", self.aperture),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.ground_altitude >= 0.0) || !(self.altitude > self.ground_altitude) {
            return Err(Error::Domain(format!(
                "altitudes must satisfy H > h0 >= 0 (H={}, h0={})",
                self.altitude, self.ground_altitude
            )));
        }
        if !(0.0..FRAC_PI_2).contains(&self.zenith) {
            return Err(Error::Domain(format!(
                "zenith angle must lie in [0, π/2), got {}",
                self.zenith
            )));
        }
        Ok(())
    }

    /// Slant distance `L = (H − h₀)/cos ζ`.
    pub fn distance(&self) -> f64 {
        (self.altitude - self.ground_altitude) / self.zenith.cos()
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// Fresnel parameter `Ω = kW₀²/(2L)`.
    pub fn fresnel(&self) -> f64 {
        self.wavenumber() * self.waist * self.waist / (2.0 * self.distance())
    }
}

/// Hufnagel-Valley profile parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceProfile {
    /// r.m.s. wind speed (m/s).
    pub wind_speed: f64,
    /// Ground-level structure constant `C²ₙ(0)` (m^-2/3).
    pub cn2_ground: f64,
}

impl TurbulenceProfile {
    pub fn reference() -> Self {
        Self {
            wind_speed: 6.0,
            cn2_ground: 9.6e-14,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wind_speed >= 0.0) || !(self.cn2_ground >= 0.0) {
            return Err(Error::Domain(format!(
                "turbulence parameters must be non-negative (v={}, A={})",
                self.wind_speed, self.cn2_ground
            )));
        }
        Ok(())
    }
}

/// Hufnagel-Valley refractive-index structure constant at altitude `h` (m).
pub fn cn2(h: f64, profile: &TurbulenceProfile) -> f64 {
    let v = profile.wind_speed / 27.0;
    0.00594 * v * v * (h * 1e-5).powi(10) * (-h / 1000.0).exp()
        + 2.7e-16 * (-h / 1500.0).exp()
        + profile.cn2_ground * (-h / 100.0).exp()
}

/// `σ_R² = 2.25 k^{7/6} sec^{11/6}ζ ∫_{h₀}^{H} C²ₙ(h)(h − h₀)^{5/6} dh`.
pub fn rytov_variance(geom: &LinkGeometry, profile: &TurbulenceProfile) -> Result<f64> {
    geom.validate()?;
    profile.validate()?;
    let h0 = geom.ground_altitude;
    let breaks: Vec<f64> = [300.0, 1.5e3, 5e3, 1e4, 2e4, 5e4]
        .iter()
        .map(|d| h0 + d)
        .collect();
    let integral = integrate(
        |h| cn2(h, profile) * (h - h0).max(0.0).powf(5.0 / 6.0),
        h0,
        geom.altitude,
        &breaks,
        RYTOV_REL_TOL,
        0.0,
    )?;
    let sec = 1.0 / geom.zenith.cos();
    Ok(2.25 * geom.wavenumber().powf(7.0 / 6.0) * sec.powf(11.0 / 6.0) * integral.value)
}

/// Scintillation index from the Rytov variance.
pub fn scintillation_index(sigma_r2: f64) -> f64 {
    let s125 = sigma_r2.powf(1.2); // σ_R^{12/5}
    let t1 = 0.49 * sigma_r2 / (1.0 + 1.11 * s125).powf(7.0 / 6.0);
    let t2 = 0.51 * sigma_r2 / (1.0 + 0.69 * s125).powf(5.0 / 6.0);
    (t1 + t2).exp_m1()
}

/// Moments of the beam parameters `{x, y, θ₁, θ₂}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamStats {
    /// `⟨Δx²⟩ = ⟨Δy²⟩` (m²).
    pub var_xy: f64,
    /// `⟨θ₁⟩ = ⟨θ₂⟩`.
    pub mean_theta: f64,
    /// `⟨Δθ₁²⟩ = ⟨Δθ₂²⟩`.
    pub var_theta: f64,
    /// `⟨Δθ₁Δθ₂⟩`.
    pub cov_theta: f64,
    pub sigma_i2: f64,
    pub omega: f64,
    pub sigma_r2: f64,
}

impl BeamStats {
    /// Moments for a given scintillation index, Fresnel parameter and waist.
    pub fn from_scintillation(sigma_i2: f64, omega: f64, waist: f64) -> Result<Self> {
        if !(sigma_i2 >= 0.0) || !(omega > 0.0) || !(waist > 0.0) {
            return Err(Error::Domain(format!(
                "invalid beam inputs (σ_I²={sigma_i2}, Ω={omega}, W₀={waist})"
            )));
        }
        let s = sigma_i2 * omega.powf(5.0 / 6.0);
        let spread = 1.0 + 2.96 * s;
        let spread2 = spread * spread;
        let cov_arg = 1.0 - 0.8 * s / spread2;
        if !(cov_arg > 0.0) {
            return Err(Error::TurbulenceTooStrong(format!(
                "log argument of ⟨Δθ₁Δθ₂⟩ is {cov_arg}"
            )));
        }
        Ok(Self {
            var_xy: 0.33 * waist * waist * sigma_i2 * omega.powf(-7.0 / 6.0),
            mean_theta: (spread2 / (omega * omega * (spread2 + 1.2 * s).sqrt())).ln(),
            var_theta: (1.2 * s / spread2).ln_1p(),
            cov_theta: cov_arg.ln(),
            sigma_i2,
            omega,
            sigma_r2: f64::NAN,
        })
    }
}

pub fn beam_stats(geom: &LinkGeometry, profile: &TurbulenceProfile) -> Result<BeamStats> {
    let sigma_r2 = rytov_variance(geom, profile)?;
    let sigma_i2 = scintillation_index(sigma_r2);
    let mut stats = BeamStats::from_scintillation(sigma_i2, geom.fresnel(), geom.waist)?;
    stats.sigma_r2 = sigma_r2;
    Ok(stats)
}

/// One realisation of the received beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSample {
    pub x: f64,
    pub y: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub phi: f64,
    pub w1: f64,
    pub w2: f64,
    pub eta: f64,
}

/// Support of the uniformly distributed ellipse orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhiRange {
    /// `[0, π/2)`: sufficient because η is π-periodic in φ and invariant
    /// under `(W₁, W₂, φ) → (W₂, W₁, φ + π/2)`.
    #[default]
    Quarter,
    /// `[0, 2π)`.
    Full,
}

impl PhiRange {
    fn upper(self) -> f64 {
        match self {
            PhiRange::Quarter => FRAC_PI_2,
            PhiRange::Full => TAU,
        }
    }
}

/// Draws beam realisations for fixed moments.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSampler {
    stats: BeamStats,
    waist: f64,
    aperture: f64,
    phi_range: PhiRange,
    sd_xy: f64,
    // lower Cholesky factor of the θ covariance
    l11: f64,
    l21: f64,
    l22: f64,
}

impl BeamSampler {
    pub fn new(stats: BeamStats, waist: f64, aperture: f64, phi_range: PhiRange) -> Result<Self> {
        if !(stats.var_xy >= 0.0) || !(stats.var_theta >= 0.0) {
            return Err(Error::Domain("beam variances must be non-negative".into()));
        }
        if !(waist > 0.0) || !(aperture > 0.0) {
            return Err(Error::Domain("waist and aperture must be positive".into()));
        }
        let (v, c) = (stats.var_theta, stats.cov_theta);
        let (l11, l21, l22) = if v == 0.0 {
            (0.0, 0.0, 0.0)
        } else if c.abs() <= v {
            let l11 = v.sqrt();
            let l21 = c / l11;
            (l11, l21, (v - l21 * l21).max(0.0).sqrt())
        } else {
            // |cov| > var: indefinite through round-off. Drop the negative
            // eigenvalue (eigenvector (1, -sign c)/√2) and keep the rank-1 part.
            log::warn!("θ covariance indefinite (var={v}, cov={c}); clamping eigenvalue to 0");
            let lambda = v + c.abs();
            let l11 = (lambda / 2.0).sqrt();
            (l11, l11.copysign(c), 0.0)
        };
        Ok(Self {
            stats,
            waist,
            aperture,
            phi_range,
            sd_xy: stats.var_xy.sqrt(),
            l11,
            l21,
            l22,
        })
    }

    pub fn for_link(geom: &LinkGeometry, profile: &TurbulenceProfile, phi_range: PhiRange) -> Result<Self> {
        Self::new(beam_stats(geom, profile)?, geom.waist, geom.aperture, phi_range)
    }

    pub fn stats(&self) -> &BeamStats {
        &self.stats
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BeamSample> {
        let z: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let phi = rng.random::<f64>() * self.phi_range.upper();
        let x = self.sd_xy * z[0];
        let y = self.sd_xy * z[1];
        let theta1 = self.stats.mean_theta + self.l11 * z[2];
        let theta2 = self.stats.mean_theta + self.l21 * z[2] + self.l22 * z[3];
        let w1 = self.waist * (0.5 * theta1).exp();
        let w2 = self.waist * (0.5 * theta2).exp();
        let eta = transmissivity(x, y, w1, w2, phi, self.aperture)?;
        Ok(BeamSample {
            x,
            y,
            theta1,
            theta2,
            phi,
            w1,
            w2,
            eta,
        })
    }

    /// Sample `index` of the sequence seeded by `seed`. Each index owns an
    /// independent ChaCha stream, so results do not depend on how samples
    /// are distributed over workers.
    pub fn sample_indexed(&self, seed: u64, index: u64) -> Result<BeamSample> {
        let mut rng = sample_rng(seed, index);
        self.sample(&mut rng)
    }
}

/// Random source for sample `index` of the sequence seeded by `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Scale `R(W)` and shape `λ(W)` of the aperture-clipping law at spatial
/// frequency `w` (1/m).
fn scale_and_shape(aperture: f64, w: f64) -> (f64, f64) {
    let x = aperture * aperture * w * w;
    if x == 0.0 {
        return (f64::INFINITY, 2.0);
    }
    // d = 1 − e^{-x}I₀(x), excess = 2(1 − e^{-x/2}) − d, e1 = e^{-x}I₁(x)
    let (d, excess, e1) = if x < 0.02 {
        let d = x
            * (1.0
                + x * (-3.0 / 4.0
                    + x * (5.0 / 12.0
                        + x * (-35.0 / 192.0
                            + x * (21.0 / 320.0
                                + x * (-77.0 / 3840.0 + x * (143.0 / 26880.0 - x * 143.0 / 114688.0)))))));
        let excess = x
            * x
            * (0.5
                + x * (-3.0 / 8.0
                    + x * (17.0 / 96.0
                        + x * (-25.0 / 384.0
                            + x * (461.0 / 23040.0 + x * (-49.0 / 9216.0 + x * 3217.0 / 2580480.0))))));
        let e1 = x
            * (0.5
                + x * (-0.5
                    + x * (5.0 / 16.0
                        + x * (-7.0 / 48.0
                            + x * (7.0 / 128.0 + x * (-11.0 / 640.0 + x * (143.0 / 30720.0 - x * 143.0 / 129024.0)))))));
        (d, excess, e1)
    } else {
        let d = 1.0 - i0e(x);
        let excess = -2.0 * (-0.5 * x).exp_m1() - d;
        (d, excess, i1e(x))
    };
    let log_ratio = (excess / d).ln_1p();
    let shape = 2.0 * x * e1 / d / log_ratio;
    let scale = log_ratio.powf(-1.0 / shape);
    (scale, shape)
}

/// Transmissivity of a centred elliptic beam.
fn centred_transmissivity(w1: f64, w2: f64, aperture: f64) -> f64 {
    let a2 = aperture * aperture;
    let u = a2 / (w1 * w1);
    let v = a2 / (w2 * w2);
    // I₀(u − v)e^{−(u+v)} = e^{-|u−v|}I₀(u − v) · e^{−2 min(u, v)}
    let isotropic = i0e(u - v) * (-2.0 * u.min(v)).exp();
    let delta = 1.0 / w1 - 1.0 / w2;
    let deform = -2.0 * (-0.5 * a2 * delta * delta).exp_m1();
    let anisotropic = if deform == 0.0 {
        0.0
    } else {
        let (scale, shape) = scale_and_shape(aperture, delta);
        let ratio = (w1 + w2) * (w1 + w2) / (w1 * w1 - w2 * w2).abs();
        deform * (-(ratio / scale).powf(shape)).exp()
    };
    1.0 - isotropic - anisotropic
}

/// Effective spot radius `W_eff(φ)` of an ellipse with semi-axes `w1, w2`.
pub fn effective_radius(w1: f64, w2: f64, phi: f64, aperture: f64) -> Result<f64> {
    let a2 = aperture * aperture;
    let (c2, s2) = (phi.cos().powi(2), phi.sin().powi(2));
    let ln_arg = (4.0 * a2 / (w1 * w2)).ln()
        + a2 / (w1 * w1) * (1.0 + 2.0 * c2)
        + a2 / (w2 * w2) * (1.0 + 2.0 * s2);
    let w = lambert_w0_exp(ln_arg)
        .filter(|w| *w > 0.0 && w.is_finite())
        .ok_or_else(|| Error::Numerical(format!("Lambert W failed for ln(argument) = {ln_arg}")))?;
    Ok((4.0 * a2 / w).sqrt())
}

/// Fraction of the beam power captured by a circular aperture of radius
/// `aperture`, for an elliptic Gaussian beam with centroid `(x, y)`,
/// semi-axes `w1, w2` and orientation `phi`.
pub fn transmissivity(x: f64, y: f64, w1: f64, w2: f64, phi: f64, aperture: f64) -> Result<f64> {
    if !(w1 > 0.0 && w2 > 0.0 && aperture > 0.0) {
        return Err(Error::Domain(format!(
            "beam semi-axes and aperture must be positive (W1={w1}, W2={w2}, r0={aperture})"
        )));
    }
    let eta0 = centred_transmissivity(w1, w2, aperture);
    let offset = x.hypot(y);
    if offset == 0.0 {
        return Ok(eta0.clamp(0.0, 1.0));
    }
    let phi0 = y.atan2(x);
    let w_eff = effective_radius(w1, w2, phi - phi0, aperture)?;
    let (scale, shape) = scale_and_shape(aperture, 2.0 / w_eff);
    let eta = eta0 * (-(offset / aperture / scale).powf(shape)).exp();
    Ok(eta.clamp(0.0, 1.0))
}

/// `−10 log₁₀` of the sample-mean transmissivity.
pub fn mean_attenuation_db(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("no transmissivity samples".into()));
    }
    if let Some(bad) = samples.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::Domain(format!("transmissivity {bad} outside [0, 1]")));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if mean == 0.0 {
        return Err(Error::InfiniteAttenuation);
    }
    Ok(-10.0 * mean.log10())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

pub fn linear_to_db(eta: f64) -> f64 {
    -10.0 * eta.log10()
}
