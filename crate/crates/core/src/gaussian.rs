//! Two-mode Gaussian states in block covariance form.
//!
//! Every state handled by the protocol pipeline is a phase-insensitive
//! two-mode state whose 4x4 covariance matrix (quadrature order
//! `X_A, P_A, X_B, P_B`, vacuum variance 1) has the block structure
//!
//! ```text
//! [ a·I   c·Z ]
//! [ c·Z   b·I ]      Z = diag(1, -1)
//! ```
//!
//! so a state is carried around as the triple `(a, b, c)`. Squeezing,
//! thermal-loss channels and the noiseless filters all map this family
//! onto itself.

use crate::error::{Error, Result};

/// Slack allowed on symplectic eigenvalues and variances below the vacuum
/// level before a state is declared non-physical.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Which arm of a two-mode state an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

/// Block-form covariance matrix of one `(A_k, B_k)` supermode pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCM {
    a: f64,
    b: f64,
    c: f64,
}

impl TwoModeCM {
    /// Builds a covariance matrix, rejecting entries that violate the
    /// uncertainty principle.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::NonPhysical(format!(
                "non-finite entries (a={a}, b={b}, c={c})"
            )));
        }
        if a < 1.0 - PHYSICALITY_TOL || b < 1.0 - PHYSICALITY_TOL {
            return Err(Error::NonPhysical(format!(
                "variance below vacuum (a={a}, b={b})"
            )));
        }
        let cm = Self { a, b, c };
        let spectrum = symplectic_eigenvalues(&cm)?;
        if spectrum.min() < 1.0 - PHYSICALITY_TOL {
            return Err(Error::NonPhysical(format!(
                "symplectic eigenvalues ({}, {}) below 1",
                spectrum.nu1, spectrum.nu2
            )));
        }
        Ok(cm)
    }

    /// Builds a covariance matrix without checking physicality.
    pub const fn new_unchecked(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub const fn vacuum() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            c: 0.0,
        }
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Quadrature variance of the requested mode.
    #[inline]
    pub fn variance(&self, mode: Mode) -> f64 {
        match mode {
            Mode::A => self.a,
            Mode::B => self.b,
        }
    }

    /// `a·b − c²`; equals 1 for pure states.
    pub fn block_determinant(&self) -> f64 {
        self.a * self.b - self.c * self.c
    }

    /// Dense 4x4 matrix in `X_A, P_A, X_B, P_B` ordering.
    pub fn to_dense(&self) -> [[f64; 4]; 4] {
        let (a, b, c) = (self.a, self.b, self.c);
        [
            [a, 0.0, c, 0.0],
            [0.0, a, 0.0, -c],
            [c, 0.0, b, 0.0],
            [0.0, -c, 0.0, b],
        ]
    }

    /// Recovers the block triple from a dense matrix, returning it together
    /// with the largest deviation from block structure.
    pub fn from_dense(m: &[[f64; 4]; 4]) -> (Self, f64) {
        let a = 0.5 * (m[0][0] + m[1][1]);
        let b = 0.5 * (m[2][2] + m[3][3]);
        let c = 0.25 * (m[0][2] + m[2][0] - m[1][3] - m[3][1]);
        let reference = Self { a, b, c }.to_dense();
        let mut residual = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                residual = residual.max((m[i][j] - reference[i][j]).abs());
            }
        }
        (Self { a, b, c }, residual)
    }
}

/// Symplectic eigenvalues of a [`TwoModeCM`], in the `(ν₁, ν₂)` order of
/// the closed form `½[√((a+b)² − 4c²) ± (b − a)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    pub nu1: f64,
    pub nu2: f64,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.nu1.min(self.nu2)
    }
}

/// Covariance matrix of a two-mode squeezed vacuum with squeezing `r`.
pub fn epr_cm(r: f64) -> Result<TwoModeCM> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "squeezing parameter must be finite and non-negative, got {r}"
        )));
    }
    let (s, c) = ((2.0 * r).sinh(), (2.0 * r).cosh());
    Ok(TwoModeCM::new_unchecked(c, c, s))
}

pub fn symplectic_eigenvalues(cm: &TwoModeCM) -> Result<SymplecticSpectrum> {
    let sum = cm.a + cm.b;
    let disc = sum * sum - 4.0 * cm.c * cm.c;
    let root = if disc >= 0.0 {
        disc.sqrt()
    } else if disc > -PHYSICALITY_TOL * sum * sum {
        // boundary state, round-off only
        0.0
    } else {
        return Err(Error::NonPhysical(format!(
            "(a+b)^2 - 4c^2 = {disc} < 0 for (a={}, b={}, c={})",
            cm.a, cm.b, cm.c
        )));
    };
    let diff = cm.b - cm.a;
    Ok(SymplecticSpectrum {
        nu1: 0.5 * (root + diff),
        nu2: 0.5 * (root - diff),
    })
}

/// Mean photon number of a mode with quadrature variance `variance`
/// (ħ = 2, vacuum variance 1).
pub fn mean_photon_number(variance: f64) -> Result<f64> {
    if !(variance >= 1.0 - PHYSICALITY_TOL) {
        return Err(Error::Domain(format!(
            "quadrature variance {variance} is below the vacuum level"
        )));
    }
    Ok(((variance - 1.0) / 2.0).max(0.0))
}

/// Shape of the PDC supermode coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// Only the first coefficient is non-zero.
    Single,
    /// `λ_{k+1}/λ_k = e^{−decay}`.
    Exponential { decay: f64 },
    /// All coefficients equal.
    Flat,
}

/// Default decay rate for the exponential scenario.
pub const DEFAULT_DECAY: f64 = 0.5;
/// Default number of supermodes.
pub const DEFAULT_SUPERMODES: usize = 5;

/// Normalised supermode coefficients `λ_k` together with the overall PDC
/// gain `g`; supermode `k` carries squeezing `r_k = g·λ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupermodeSpectrum {
    lambdas: Vec<f64>,
    gain: f64,
    scenario: Scenario,
}

impl SupermodeSpectrum {
    pub fn new(scenario: Scenario, supermodes: usize, gain: f64) -> Result<Self> {
        if supermodes == 0 {
            return Err(Error::Domain("at least one supermode is required".into()));
        }
        check_gain(gain)?;
        let raw: Vec<f64> = match scenario {
            Scenario::Single => (0..supermodes)
                .map(|k| if k == 0 { 1.0 } else { 0.0 })
                .collect(),
            Scenario::Flat => vec![1.0; supermodes],
            Scenario::Exponential { decay } => {
                if !(decay > 0.0) || !decay.is_finite() {
                    return Err(Error::Domain(format!(
                        "exponential decay must be positive, got {decay}"
                    )));
                }
                (0..supermodes).map(|k| (-decay * k as f64).exp()).collect()
            }
        };
        let norm = raw.iter().map(|l| l * l).sum::<f64>().sqrt();
        Ok(Self {
            lambdas: raw.into_iter().map(|l| l / norm).collect(),
            gain,
            scenario,
        })
    }

    /// Arbitrary coefficients; they are sorted in non-increasing order and
    /// normalised so that `Σ λ_k² = 1`.
    pub fn from_lambdas(mut lambdas: Vec<f64>, gain: f64) -> Result<Self> {
        check_gain(gain)?;
        if lambdas.is_empty() {
            return Err(Error::Domain("at least one supermode is required".into()));
        }
        if lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(Error::Domain(
                "supermode coefficients must be finite and non-negative".into(),
            ));
        }
        let norm = lambdas.iter().map(|l| l * l).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Domain("supermode coefficients are all zero".into()));
        }
        lambdas.sort_by(|x, y| y.total_cmp(x));
        lambdas.iter_mut().for_each(|l| *l /= norm);
        let scenario = if lambdas.iter().skip(1).all(|&l| l == 0.0) {
            Scenario::Single
        } else if lambdas.iter().all(|&l| l == lambdas[0]) {
            Scenario::Flat
        } else {
            // Not necessarily geometric; tagged by its leading ratio.
            Scenario::Exponential {
                decay: (lambdas[0] / lambdas[1]).ln(),
            }
        };
        Ok(Self {
            lambdas,
            gain,
            scenario,
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn set_gain(&mut self, gain: f64) -> Result<()> {
        check_gain(gain)?;
        self.gain = gain;
        Ok(())
    }

    pub fn with_gain(&self, gain: f64) -> Result<Self> {
        let mut out = self.clone();
        out.set_gain(gain)?;
        Ok(out)
    }

    /// Squeezing parameters `r_k = g·λ_k`.
    pub fn squeezing(&self) -> impl Iterator<Item = f64> + '_ {
        self.lambdas.iter().map(move |l| self.gain * l)
    }
}

fn check_gain(gain: f64) -> Result<()> {
    if !(gain >= 0.0) || !gain.is_finite() {
        return Err(Error::Domain(format!(
            "PDC gain must be finite and non-negative, got {gain}"
        )));
    }
    Ok(())
}

/// Independent EPR pairs making up the PDC output, one per supermode.
pub fn pdc_state(spectrum: &SupermodeSpectrum) -> Vec<TwoModeCM> {
    spectrum
        .squeezing()
        .map(|r| epr_cm(r).expect("squeezing is non-negative by construction"))
        .collect()
}
