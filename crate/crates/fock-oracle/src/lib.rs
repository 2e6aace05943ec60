//! Brute-force truncated Fock-space reference for two-mode states.
//!
//! Used only as a test oracle for the covariance-matrix pipeline: it works
//! directly with photon-number amplitudes and density matrices, applies
//! the noiseless filters as `s^N̂`, and realises the thermal-loss channel
//! through Kraus operators. It shares no code with the Gaussian
//! implementation it checks.

use thiserror::Error;

/// Tail mass above which a truncated computation is rejected.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Default number of amplifier Kraus operators kept in the thermal-loss
/// decomposition.
pub const DEFAULT_KRAUS_RANK: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("photon-number cutoff {cutoff} too small: estimated tail mass {tail:e}")]
    CutoffTooSmall { cutoff: usize, tail: f64 },
    #[error("filtered state is not normalisable (amplitude ratio {ratio} >= 1)")]
    NonNormalizable { ratio: f64 },
    #[error("covariance has non-block entries of size {0:e}")]
    Structure(f64),
    #[error("invalid argument: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    A,
    B,
}

impl Target {
    pub fn other(self) -> Self {
        match self {
            Target::A => Target::B,
            Target::B => Target::A,
        }
    }
}

/// Second moments in shot-noise units (ħ = 2) of a two-mode state:
/// block entries plus the largest non-block deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub residual: f64,
}

/// Pure two-mode state with real amplitudes `c[m][n]`, `m, n ≤ cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockTwoModeState {
    cutoff: usize,
    amps: Vec<f64>,
}

impl FockTwoModeState {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitude(&self, m: usize, n: usize) -> f64 {
        self.amps[m * (self.cutoff + 1) + n]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|x| x * x).sum()
    }

    /// Probability mass missing from the truncated amplitudes.
    pub fn truncation_mass(&self) -> f64 {
        (1.0 - self.norm_sq()).max(0.0)
    }

    fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

/// Two-mode squeezed vacuum `√(1 − tanh²r) Σ tanhⁿr |n, n⟩`, truncated
/// (not renormalised) at `cutoff`.
pub fn epr_fock(r: f64, cutoff: usize) -> Result<FockTwoModeState> {
    if !(r >= 0.0) || cutoff == 0 {
        return Err(OracleError::Domain(format!("r = {r}, cutoff = {cutoff}")));
    }
    let dim = cutoff + 1;
    let t = r.tanh();
    let norm = (1.0 - t * t).sqrt();
    let mut amps = vec![0.0; dim * dim];
    let mut tn = 1.0;
    for n in 0..dim {
        amps[n * dim + n] = norm * tn;
        tn *= t;
    }
    Ok(FockTwoModeState { cutoff, amps })
}

/// Result of a filter: the renormalised state and the estimated mass the
/// truncation discards.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered<S> {
    pub state: S,
    pub tail_mass: f64,
}

/// Geometric extrapolation of the tail beyond the cutoff from the last two
/// photon-number probabilities of the filtered mode.
fn geometric_tail(last: f64, before_last: f64) -> Result<f64> {
    if last == 0.0 {
        return Ok(0.0);
    }
    let ratio = last / before_last;
    if !(ratio < 1.0) {
        return Err(OracleError::NonNormalizable { ratio });
    }
    Ok(last * ratio / (1.0 - ratio))
}

/// Applies `s^N̂` on the target mode and renormalises.
pub fn apply_fock_filter(
    state: &FockTwoModeState,
    s: f64,
    target: Target,
) -> Result<Filtered<FockTwoModeState>> {
    if !(s > 0.0) {
        return Err(OracleError::Domain(format!("filter scale {s}")));
    }
    let dim = state.dim();
    let mut out = state.clone();
    for m in 0..dim {
        for n in 0..dim {
            let k = match target {
                Target::A => m,
                Target::B => n,
            };
            out.amps[m * dim + n] *= s.powi(k as i32);
        }
    }
    let norm = out.norm_sq();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(OracleError::NonNormalizable { ratio: f64::INFINITY });
    }
    let scale = norm.sqrt().recip();
    out.amps.iter_mut().for_each(|x| *x *= scale);

    // Correlations carry the filter's reweighting into the other mode, so
    // both marginals are checked.
    let marginal = |mode: Target, k: usize| -> f64 {
        (0..dim)
            .map(|j| {
                let v = match mode {
                    Target::A => out.amps[k * dim + j],
                    Target::B => out.amps[j * dim + k],
                };
                v * v
            })
            .sum()
    };
    let tail = geometric_tail(marginal(target, dim - 1), marginal(target, dim - 2))?.max(
        geometric_tail(marginal(target.other(), dim - 1), marginal(target.other(), dim - 2))?,
    );
    if tail > TAIL_TOLERANCE {
        return Err(OracleError::CutoffTooSmall {
            cutoff: state.cutoff,
            tail,
        });
    }
    Ok(Filtered {
        state: out,
        tail_mass: tail,
    })
}

/// Quadrature covariance of a (normalised) pure state via ladder-operator
/// matrix elements.
pub fn cm_from_fock(state: &FockTwoModeState) -> Result<Moments> {
    let dim = state.dim();
    let amp = |m: usize, n: usize| -> f64 {
        if m < dim && n < dim {
            state.amps[m * dim + n]
        } else {
            0.0
        }
    };
    let sq = |k: usize| (k as f64).sqrt();
    let norm = state.norm_sq();

    // ⟨ψ|O|ψ⟩ for the moments that enter the covariance matrix
    let (mut na, mut nb, mut ab) = (0.0, 0.0, 0.0);
    let (mut a1, mut b1, mut a2, mut b2, mut adb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for m in 0..dim {
        for n in 0..dim {
            let c = amp(m, n);
            if c == 0.0 {
                continue;
            }
            na += m as f64 * c * c;
            nb += n as f64 * c * c;
            // ⟨m−1, n−1| a b |m, n⟩ = √(mn)
            if m > 0 && n > 0 {
                ab += amp(m - 1, n - 1) * sq(m) * sq(n) * c;
            }
            if m > 0 {
                a1 += amp(m - 1, n) * sq(m) * c;
            }
            if n > 0 {
                b1 += amp(m, n - 1) * sq(n) * c;
            }
            if m > 1 {
                a2 += amp(m - 2, n) * sq(m) * sq(m - 1) * c;
            }
            if n > 1 {
                b2 += amp(m, n - 2) * sq(n) * sq(n - 1) * c;
            }
            // a† b |m, n⟩ = √((m+1) n) |m+1, n−1⟩
            if n > 0 {
                adb += amp(m + 1, n - 1) * sq(m + 1) * sq(n) * c;
            }
        }
    }
    let (na, nb, ab, a1, b1, a2, b2, adb) = (
        na / norm,
        nb / norm,
        ab / norm,
        a1 / norm,
        b1 / norm,
        a2 / norm,
        b2 / norm,
        adb / norm,
    );

    // Real amplitudes give real moments. For Q = u·α + ū·α†:
    // Var X = 2⟨α²⟩ + 2n + 1 − (2⟨α⟩)², Var P = −2⟨α²⟩ + 2n + 1,
    // ⟨X_A X_B⟩ = 2⟨ab⟩ + 2⟨a†b⟩ − 4⟨a⟩⟨b⟩, ⟨P_A P_B⟩ = −2⟨ab⟩ + 2⟨a†b⟩.
    let var_xa = 2.0 * a2 + 2.0 * na + 1.0 - 4.0 * a1 * a1;
    let var_pa = -2.0 * a2 + 2.0 * na + 1.0;
    let var_xb = 2.0 * b2 + 2.0 * nb + 1.0 - 4.0 * b1 * b1;
    let var_pb = -2.0 * b2 + 2.0 * nb + 1.0;
    let xx = 2.0 * ab + 2.0 * adb - 4.0 * a1 * b1;
    let pp = -2.0 * ab + 2.0 * adb;

    let a = 0.5 * (var_xa + var_pa);
    let b = 0.5 * (var_xb + var_pb);
    let c = 0.5 * (xx - pp);
    let residual = [
        0.5 * (var_xa - var_pa),
        0.5 * (var_xb - var_pb),
        0.5 * (xx + pp),
        2.0 * a1,
        2.0 * b1,
    ]
    .iter()
    .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if residual > 1e-6 {
        return Err(OracleError::Structure(residual));
    }
    Ok(Moments { a, b, c, residual })
}

fn binomial_table(max_n: usize) -> Vec<Vec<f64>> {
    let mut table = vec![vec![1.0]];
    for n in 1..=max_n {
        let prev = &table[n - 1];
        let mut row = vec![1.0; n + 1];
        for k in 1..n {
            row[k] = prev[k - 1] + prev[k];
        }
        table.push(row);
    }
    table
}

/// Phase-covariant two-mode density matrix.
///
/// States reachable from a two-mode squeezed vacuum by the operations here
/// only couple `|m, n⟩⟨m', n'|` with `m − n = m' − n'`, so the matrix is
/// stored as one `(m, m')` block per photon-number difference `d = m − n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    cutoff: usize,
    // index ((d + cutoff)·dim + m)·dim + m'
    rho: Vec<f64>,
}

impl FockDensity {
    fn dim(&self) -> usize {
        self.cutoff + 1
    }

    fn idx(&self, d: isize, m: usize, mp: usize) -> usize {
        let dim = self.dim();
        (((d + self.cutoff as isize) as usize) * dim + m) * dim + mp
    }

    fn zeros(cutoff: usize) -> Self {
        let dim = cutoff + 1;
        Self {
            cutoff,
            rho: vec![0.0; (2 * cutoff + 1) * dim * dim],
        }
    }

    /// `|ψ⟩⟨ψ|` of the truncated two-mode squeezed vacuum.
    pub fn epr(r: f64, cutoff: usize) -> Result<Self> {
        let psi = epr_fock(r, cutoff)?;
        let mut out = Self::zeros(cutoff);
        for m in 0..=cutoff {
            for mp in 0..=cutoff {
                let i = out.idx(0, m, mp);
                out.rho[i] = psi.amplitude(m, m) * psi.amplitude(mp, mp);
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> f64 {
        let n = self.cutoff as isize;
        let mut t = 0.0;
        for d in -n..=n {
            for m in 0..=self.cutoff {
                t += self.rho[self.idx(d, m, m)];
            }
        }
        t
    }

    fn renormalise(&mut self) -> f64 {
        let t = self.trace();
        self.rho.iter_mut().for_each(|x| *x /= t);
        t
    }

    /// Iterates over stored elements `(d, m, n, m', n', value)` with both
    /// photon numbers of mode B inside the cutoff.
    fn for_each_element(&self, mut f: impl FnMut(isize, usize, usize, usize, usize, f64)) {
        let n_cut = self.cutoff as isize;
        for d in -n_cut..=n_cut {
            for m in 0..=self.cutoff {
                let n = m as isize - d;
                if n < 0 || n > n_cut {
                    continue;
                }
                for mp in 0..=self.cutoff {
                    let np = mp as isize - d;
                    if np < 0 || np > n_cut {
                        continue;
                    }
                    let v = self.rho[self.idx(d, m, mp)];
                    if v != 0.0 {
                        f(d, m, n as usize, mp, np as usize, v);
                    }
                }
            }
        }
    }

    /// Pure loss of transmissivity `tau` on mode B (exact: all Kraus
    /// operators are kept).
    fn pure_loss_b(&self, tau: f64) -> Self {
        let n_cut = self.cutoff;
        let binom = binomial_table(n_cut);
        // κ_k(n) = √C(n,k) τ^{(n−k)/2} (1−τ)^{k/2}
        let kappa = |n: usize, k: usize| -> f64 {
            binom[n][k].sqrt() * tau.powf(0.5 * (n - k) as f64) * (1.0 - tau).powf(0.5 * k as f64)
        };
        let mut out = Self::zeros(n_cut);
        self.for_each_element(|d, m, n, mp, np, v| {
            for k in 0..=n.min(np) {
                let i = out.idx(d + k as isize, m, mp);
                out.rho[i] += kappa(n, k) * kappa(np, k) * v;
            }
        });
        out
    }

    /// Quantum-limited amplifier of gain `gain` on mode B with `rank`
    /// Kraus operators; returns the state and the trace lost to the cutoff
    /// and to the discarded Kraus operators.
    fn amplifier_b(&self, gain: f64, rank: usize) -> (Self, f64) {
        let n_cut = self.cutoff;
        let binom = binomial_table(n_cut + rank);
        let x = 1.0 - 1.0 / gain;
        // κ_k(n) = √(1/G) √C(n+k,k) x^{k/2} G^{−n/2}
        let kappa = |n: usize, k: usize| -> f64 {
            (binom[n + k][k] / gain).sqrt() * x.powf(0.5 * k as f64) * gain.powf(-0.5 * n as f64)
        };
        let before = self.trace();
        let mut out = Self::zeros(n_cut);
        self.for_each_element(|d, m, n, mp, np, v| {
            for k in 0..rank {
                if n + k > n_cut || np + k > n_cut {
                    break;
                }
                let i = out.idx(d - k as isize, m, mp);
                out.rho[i] += kappa(n, k) * kappa(np, k) * v;
            }
        });
        let lost = before - out.trace();
        (out, lost)
    }

    /// Thermal-loss channel `b → η(b + ε) + 1 − η` on mode B, realised as a
    /// pure loss `η/G` followed by a quantum-limited amplifier
    /// `G = 1 + ηε/2`.
    pub fn thermal_loss(&self, eta: f64, epsilon: f64, kraus_rank: usize) -> Result<Filtered<Self>> {
        if !(0.0..=1.0).contains(&eta) || !(epsilon >= 0.0) {
            return Err(OracleError::Domain(format!("η = {eta}, ε = {epsilon}")));
        }
        let gain = 1.0 + 0.5 * eta * epsilon;
        let lossy = self.pure_loss_b(eta / gain);
        let (mut out, lost) = if gain > 1.0 {
            lossy.amplifier_b(gain, kraus_rank)
        } else {
            (lossy, 0.0)
        };
        if lost > TAIL_TOLERANCE {
            return Err(OracleError::CutoffTooSmall {
                cutoff: self.cutoff,
                tail: lost,
            });
        }
        out.renormalise();
        Ok(Filtered {
            state: out,
            tail_mass: lost,
        })
    }

    /// Photon-number distribution of one mode.
    pub fn marginal(&self, target: Target) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.for_each_element(|_, m, n, mp, np, v| {
            if m == mp && n == np {
                match target {
                    Target::A => p[m] += v,
                    Target::B => p[n] += v,
                }
            }
        });
        p
    }

    /// Applies `s^N̂` on the target mode and renormalises.
    pub fn filter(&self, s: f64, target: Target) -> Result<Filtered<Self>> {
        if !(s > 0.0) {
            return Err(OracleError::Domain(format!("filter scale {s}")));
        }
        let mut out = self.clone();
        let n_cut = self.cutoff as isize;
        for d in -n_cut..=n_cut {
            for m in 0..=self.cutoff {
                for mp in 0..=self.cutoff {
                    let (k, kp) = match target {
                        Target::A => (m as isize, mp as isize),
                        Target::B => (m as isize - d, mp as isize - d),
                    };
                    if k < 0 || kp < 0 {
                        continue;
                    }
                    let i = out.idx(d, m, mp);
                    out.rho[i] *= s.powi((k + kp) as i32);
                }
            }
        }
        out.renormalise();
        let dim = self.dim();
        let mut tail = 0.0f64;
        for mode in [target, target.other()] {
            let p = out.marginal(mode);
            tail = tail.max(geometric_tail(p[dim - 1], p[dim - 2])?);
        }
        if tail > TAIL_TOLERANCE {
            return Err(OracleError::CutoffTooSmall {
                cutoff: self.cutoff,
                tail,
            });
        }
        Ok(Filtered {
            state: out,
            tail_mass: tail,
        })
    }

    /// Quadrature covariance. Phase covariance makes first moments,
    /// `⟨a²⟩`, `⟨b²⟩` and `⟨a†b⟩` vanish identically, so the residual is 0.
    pub fn covariance(&self) -> Moments {
        let tr = self.trace();
        let (mut na, mut nb, mut ab) = (0.0, 0.0, 0.0);
        self.for_each_element(|d, m, n, mp, np, v| {
            if m == mp && n == np {
                na += m as f64 * v;
                nb += n as f64 * v;
            }
            // Tr(ab ρ) picks ρ[(m, n), (m−1, n−1)] with weight √(mn)
            if mp + 1 == m && np + 1 == n {
                let _ = d;
                ab += ((m * n) as f64).sqrt() * v;
            }
        });
        let (na, nb, ab) = (na / tr, nb / tr, ab / tr);
        Moments {
            a: 2.0 * na + 1.0,
            b: 2.0 * nb + 1.0,
            c: 2.0 * ab,
            residual: 0.0,
        }
    }
}
