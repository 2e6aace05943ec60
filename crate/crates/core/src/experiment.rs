//! Parameter optimisation, Monte Carlo averaging over atmospheric
//! transmissivity, and feasibility searches.
//!
//! The optimiser maximises the total key rate over the PDC gain `g`, the
//! attenuator transmissivity `T` and the amplifier gain `G` with a coarse
//! logarithmic grid followed by a Nelder–Mead polish. Variants are solved
//! as a chain (`None → AmpOnly → AttAmp`), each seeded with the optimum of
//! the previous one, so enlarging the free parameter set can never lower
//! the reported maximum.

use crate::atmosphere::{mean_attenuation_db, BeamSampler, LinkGeometry, PhiRange, TurbulenceProfile};
use crate::channel::{apply_channel, ChannelParams};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::gaussian::{epr_cm, Mode};
use crate::keyrate::Protocol;
use crate::noiseless::{apply_noiseless_op, max_gain, NoiselessOp};

pub const DEFAULT_GAIN_CAP: f64 = 10.0;

/// Which noiseless operations the optimiser may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Only `g` is optimised.
    #[default]
    None,
    /// `g` and the amplifier gain.
    AmpOnly,
    /// `g`, the attenuator and the amplifier.
    AttAmp,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::None, Variant::AmpOnly, Variant::AttAmp];

    fn rank(self) -> usize {
        match self {
            Variant::None => 0,
            Variant::AmpOnly => 1,
            Variant::AttAmp => 2,
        }
    }
}

/// Supermodes (0-based) carrying the operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Attenuate and amplify the same supermode.
    Symmetric { supermode: usize },
    Asymmetric { attenuation: usize, amplification: usize },
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Symmetric { supermode: 0 }
    }
}

impl Strategy {
    pub fn indices(&self) -> (usize, usize) {
        match *self {
            Strategy::Symmetric { supermode } => (supermode, supermode),
            Strategy::Asymmetric {
                attenuation,
                amplification,
            } => (attenuation, amplification),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Logarithmic grid, then Nelder–Mead from the best grid point.
    #[default]
    GridThenPolish,
    /// Nelder–Mead only, started from the previous variant's optimum.
    DirectSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationConfig {
    /// Bounds on the PDC gain `g`.
    pub pdc_gain_bounds: (f64, f64),
    pub pdc_gain_points: usize,
    /// Smallest attenuator transmissivity on the grid; the polish may go
    /// below it.
    pub min_transmissivity: f64,
    pub transmissivity_points: usize,
    /// Largest amplifier gain considered; the physical bound is enforced
    /// on top of it.
    pub gain_cap: f64,
    pub gain_points: usize,
    pub strategy: Strategy,
    pub method: Method,
    /// Convergence threshold on the spread of simplex values (bits/pulse).
    pub tolerance: f64,
    /// Objective evaluations allowed to each polish.
    pub max_evaluations: usize,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            pdc_gain_bounds: (0.05, 3.0),
            pdc_gain_points: 20,
            min_transmissivity: 0.05,
            transmissivity_points: 15,
            gain_cap: DEFAULT_GAIN_CAP,
            gain_points: 15,
            strategy: Strategy::default(),
            method: Method::default(),
            tolerance: 1e-12,
            max_evaluations: 600,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.pdc_gain_bounds;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Config(format!(
                "PDC gain bounds must satisfy 0 < lo <= hi < ∞, got [{lo}, {hi}]"
            )));
        }
        if !(self.min_transmissivity > 0.0 && self.min_transmissivity <= 1.0) {
            return Err(Error::Config(format!(
                "minimum transmissivity must lie in (0, 1], got {}",
                self.min_transmissivity
            )));
        }
        if !(self.gain_cap >= 1.0 && self.gain_cap.is_finite()) {
            return Err(Error::Config(format!(
                "gain cap must be finite and >= 1, got {}",
                self.gain_cap
            )));
        }
        if self.pdc_gain_points == 0 || self.transmissivity_points == 0 || self.gain_points == 0 {
            return Err(Error::Config("grid sizes must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Config(format!("negative tolerance {}", self.tolerance)));
        }
        Ok(())
    }
}

/// Optimised parameters and the rate they achieve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub pdc_gain: f64,
    pub transmissivity: f64,
    pub amplifier_gain: f64,
    pub rate: f64,
}

/// `n` geometrically spaced points from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![hi];
    }
    let step = (hi / lo).ln() / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| lo * (step * i as f64).exp()).collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}

struct Objective<'a> {
    template: &'a Protocol,
    eta: f64,
    att_k: usize,
    amp_k: usize,
    config: &'a OptimizationConfig,
}

impl Objective<'_> {
    fn protocol(&self, g: f64, t: f64, gain: f64) -> Result<Protocol> {
        let mut p = self.template.clone();
        p.spectrum.set_gain(g)?;
        p.attenuation = if t < 1.0 {
            Some(NoiselessOp::attenuation(t, Mode::B, self.att_k)?)
        } else {
            None
        };
        p.amplification = if gain > 1.0 {
            Some(NoiselessOp::amplification(gain, Mode::B, self.amp_k)?)
        } else {
            None
        };
        Ok(p)
    }

    /// Rate at `(g, T, G)`, or `None` outside the feasible set.
    fn rate(&self, g: f64, t: f64, gain: f64) -> Result<Option<f64>> {
        let (lo, hi) = self.config.pdc_gain_bounds;
        let inside = (lo..=hi).contains(&g)
            && t > 0.0
            && t <= 1.0
            && (1.0..=self.config.gain_cap).contains(&gain);
        if !inside {
            return Ok(None);
        }
        match self.protocol(g, t, gain)?.total_rate(self.eta) {
            Ok(b) => Ok(Some(b.total)),
            Err(Error::GainBound { .. }) => Ok(None),
            // Right at the bound the amplified variance diverges and the
            // symplectic spectrum loses all precision.
            Err(Error::NonPhysical(msg)) if gain > 1.0 => {
                log::debug!("treating (g={g}, T={t}, G={gain}) as infeasible: {msg}");
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    /// Usable amplifier gain for the received mode at `(g, T)`.
    fn gain_ceiling(&self, g: f64, t: f64) -> Result<f64> {
        let spectrum = self.template.spectrum.with_gain(g)?;
        let r = spectrum.squeezing().nth(self.amp_k).ok_or_else(|| {
            Error::Domain(format!("no supermode {} to amplify", self.amp_k + 1))
        })?;
        let mut cm = epr_cm(r)?;
        if self.att_k == self.amp_k && t < 1.0 {
            cm = apply_noiseless_op(&cm, &NoiselessOp::attenuation(t, Mode::B, self.att_k)?)?;
        }
        cm = apply_channel(&cm, &ChannelParams::new(self.eta, self.template.epsilon)?);
        Ok(max_gain(cm.b()).usable(self.config.gain_cap))
    }

    fn grid(&self, variant: Variant) -> Result<Option<Optimum>> {
        let c = self.config;
        let (lo, hi) = c.pdc_gain_bounds;
        let ts = match variant {
            Variant::AttAmp => log_grid(c.min_transmissivity, 1.0, c.transmissivity_points),
            _ => vec![1.0],
        };
        let mut best: Option<Optimum> = None;
        for g in log_grid(lo, hi, c.pdc_gain_points) {
            for &t in &ts {
                let gains = match variant {
                    Variant::None => vec![1.0],
                    _ => log_grid(1.0, self.gain_ceiling(g, t)?.max(1.0), c.gain_points),
                };
                for gain in gains {
                    if let Some(rate) = self.rate(g, t, gain)? {
                        if best.is_none_or(|b| rate > b.rate) {
                            best = Some(Optimum {
                                pdc_gain: g,
                                transmissivity: t,
                                amplifier_gain: gain,
                                rate,
                            });
                        }
                    }
                }
            }
        }
        Ok(best)
    }

    /// Nelder–Mead in `(ln g, ln T, ln G)` restricted to the coordinates
    /// the variant frees.
    fn polish(&self, variant: Variant, start: Optimum) -> Result<Optimum> {
        let c = self.config;
        let (lo, hi) = c.pdc_gain_bounds;
        let dims = variant.rank() + 1;
        let free_t = variant == Variant::AttAmp;
        let to_point = |x: &[f64]| -> (f64, f64, f64) {
            let g = x[0].exp();
            let t = if free_t { x[1].exp() } else { 1.0 };
            let gain = if variant == Variant::None { 1.0 } else { x[dims - 1].exp() };
            (g, t, gain)
        };
        let mut x0 = vec![start.pdc_gain.ln()];
        let mut steps = vec![(hi / lo).ln().max(1e-3) / c.pdc_gain_points.max(2) as f64];
        if free_t {
            x0.push(start.transmissivity.ln());
            steps.push((1.0 / c.min_transmissivity).ln().max(1e-3) / c.transmissivity_points.max(2) as f64);
        }
        if variant != Variant::None {
            x0.push(start.amplifier_gain.ln());
            steps.push(c.gain_cap.ln().max(1e-3) / c.gain_points.max(2) as f64);
        }
        let objective = |x: &[f64]| -> Result<f64> {
            let (g, t, gain) = to_point(x);
            Ok(self.rate(g, t, gain)?.unwrap_or(f64::NEG_INFINITY))
        };
        let (x, rate) = nelder_mead_max(objective, &x0, &steps, c.tolerance, c.max_evaluations)?;
        let (g, t, gain) = to_point(&x);
        let polished = Optimum {
            pdc_gain: g,
            transmissivity: t,
            amplifier_gain: gain,
            rate,
        };
        Ok(if rate > start.rate { polished } else { start })
    }
}

/// Maximises `f` by Nelder–Mead. Infeasible points evaluate to `−∞`; the
/// start point must be feasible.
fn nelder_mead_max<F>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    tol: f64,
    max_evals: usize,
) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        f(x)
    };
    let f0 = eval(x0, &mut evals)?;
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let mut fx = eval(&x, &mut evals)?;
        if fx == f64::NEG_INFINITY {
            x[i] = x0[i] - steps[i];
            fx = eval(&x, &mut evals)?;
        }
        simplex.push((x, fx));
    }

    let by_value = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| b.1.total_cmp(&a.1);
    while evals < max_evals {
        simplex.sort_by(by_value);
        let (best, worst) = (simplex[0].1, simplex[n].1);
        let spread = (0..n)
            .map(|i| {
                simplex
                    .iter()
                    .map(|v| (v.0[i] - simplex[0].0[i]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (best - worst).abs() <= tol && spread <= 1e-10 {
            break;
        }
        if spread <= 1e-12 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|v| v.0[i]).sum::<f64>() / n as f64)
            .collect();
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = eval(&xr, &mut evals)?;
        if fr > simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals)?;
            simplex[n] = if fe > fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr > simplex[n].1 {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        };
        let accept = if fr > simplex[n].1 { fc >= fr } else { fc > simplex[n].1 };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink towards the best vertex
        let x_best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            for (xi, bi) in v.0.iter_mut().zip(&x_best) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            v.1 = eval(&v.0, &mut evals)?;
        }
    }
    simplex.sort_by(by_value);
    let (x, fx) = simplex.swap_remove(0);
    Ok((x, fx))
}

/// Optimum of every variant up to and including `upto`, solved as a
/// warm-started chain.
pub fn optimize_chain(
    eta: f64,
    protocol: &Protocol,
    upto: Variant,
    config: &OptimizationConfig,
) -> Result<Vec<Optimum>> {
    config.validate()?;
    ChannelParams::new(eta, protocol.epsilon)?;
    let (att_k, amp_k) = config.strategy.indices();
    let k = protocol.spectrum.len();
    if att_k >= k || amp_k >= k {
        return Err(Error::Config(format!(
            "operations placed on supermodes {} and {} but only {k} exist",
            att_k + 1,
            amp_k + 1
        )));
    }
    let objective = Objective {
        template: protocol,
        eta,
        att_k,
        amp_k,
        config,
    };

    let mut chain: Vec<Optimum> = Vec::with_capacity(upto.rank() + 1);
    for variant in Variant::ALL.into_iter().take(upto.rank() + 1) {
        let seed = match chain.last() {
            Some(prev) => Some(*prev),
            None if config.method == Method::DirectSearch => {
                let (lo, hi) = config.pdc_gain_bounds;
                let g = (lo * hi).sqrt();
                objective.rate(g, 1.0, 1.0)?.map(|rate| Optimum {
                    pdc_gain: g,
                    transmissivity: 1.0,
                    amplifier_gain: 1.0,
                    rate,
                })
            }
            None => None,
        };
        let grid = match config.method {
            Method::GridThenPolish => objective.grid(variant)?,
            Method::DirectSearch => None,
        };
        let start = match (grid, seed) {
            (Some(a), Some(b)) => {
                if a.rate > b.rate {
                    a
                } else {
                    b
                }
            }
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => {
                return Err(Error::Numerical(
                    "optimiser found no feasible point (T = 1, G = 1 should always be)".into(),
                ))
            }
        };
        chain.push(objective.polish(variant, start)?);
    }
    Ok(chain)
}

/// Maximised total rate at transmissivity `eta` for one variant.
pub fn optimize_rate(
    eta: f64,
    protocol: &Protocol,
    variant: Variant,
    config: &OptimizationConfig,
) -> Result<Optimum> {
    Ok(*optimize_chain(eta, protocol, variant, config)?
        .last()
        .expect("chain holds at least one variant"))
}

/// Rate at fixed parameters. An amplifier gain above the bound for this
/// channel is lowered to the largest usable gain.
pub fn rate_at(eta: f64, protocol: &Protocol, point: &Optimum, config: &OptimizationConfig) -> Result<f64> {
    let (att_k, amp_k) = config.strategy.indices();
    let objective = Objective {
        template: protocol,
        eta,
        att_k,
        amp_k,
        config,
    };
    let ceiling = objective.gain_ceiling(point.pdc_gain, point.transmissivity)?;
    let gain = point.amplifier_gain.min(ceiling.max(1.0));
    if gain < point.amplifier_gain {
        log::debug!("amplifier gain {} lowered to {gain} at η = {eta}", point.amplifier_gain);
    }
    objective
        .protocol(point.pdc_gain, point.transmissivity, gain)?
        .total_rate(eta)
        .map(|b| b.total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
    /// Re-optimise `{g, T, G}` for every transmissivity sample; otherwise
    /// optimise once at the sample-mean transmissivity.
    pub per_sample_optimization: bool,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            per_sample_optimization: true,
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("Monte Carlo needs at least one sample".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub eta: f64,
    pub optimum: Optimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub mean_rate: f64,
    /// Standard error of `mean_rate` (0 for a single sample).
    pub std_error: f64,
    pub mean_attenuation_db: f64,
    pub records: Vec<SampleRecord>,
}

/// Transmissivities of samples `0..n` of the sequence seeded by `seed`.
pub fn sample_transmissivities(
    sampler: &BeamSampler,
    samples: usize,
    seed: u64,
    execution: Execution,
) -> Result<Vec<f64>> {
    map_indexed(samples, execution, |i| {
        Ok(sampler.sample_indexed(seed, i as u64)?.eta)
    })
}

/// Averages the maximised total rate over transmissivity samples.
pub fn mean_key_rate(
    sampler: &BeamSampler,
    protocol: &Protocol,
    variant: Variant,
    mc: &MonteCarloConfig,
    opt: &OptimizationConfig,
    execution: Execution,
) -> Result<MonteCarloResult> {
    mc.validate()?;
    let etas = sample_transmissivities(sampler, mc.samples, mc.seed, execution)?;
    rate_over_samples(&etas, protocol, variant, mc, opt, execution)
}

/// [`mean_key_rate`] for pre-drawn transmissivities.
pub fn rate_over_samples(
    etas: &[f64],
    protocol: &Protocol,
    variant: Variant,
    mc: &MonteCarloConfig,
    opt: &OptimizationConfig,
    execution: Execution,
) -> Result<MonteCarloResult> {
    if etas.is_empty() {
        return Err(Error::Config("Monte Carlo needs at least one sample".into()));
    }
    let records = if mc.per_sample_optimization {
        map_indexed(etas.len(), execution, |i| {
            Ok(SampleRecord {
                eta: etas[i],
                optimum: optimize_rate(etas[i], protocol, variant, opt)?,
            })
        })?
    } else {
        let eta_mean = etas.iter().sum::<f64>() / etas.len() as f64;
        let at_mean = optimize_rate(eta_mean, protocol, variant, opt)?;
        map_indexed(etas.len(), execution, |i| {
            let rate = rate_at(etas[i], protocol, &at_mean, opt)?;
            Ok(SampleRecord {
                eta: etas[i],
                optimum: Optimum { rate, ..at_mean },
            })
        })?
    };

    let n = records.len() as f64;
    let mean_rate = records.iter().map(|r| r.optimum.rate).sum::<f64>() / n;
    let std_error = if records.len() > 1 {
        let ss: f64 = records.iter().map(|r| (r.optimum.rate - mean_rate).powi(2)).sum();
        (ss / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(MonteCarloResult {
        mean_rate,
        std_error,
        mean_attenuation_db: mean_attenuation_db(etas)?,
        records,
    })
}

/// Bracketing and bisection settings for a feasibility search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Upper end of the searched interval (radians for zenith angles, SNU
    /// for excess noise).
    pub upper: f64,
    pub tolerance: f64,
    pub scan_points: usize,
}

impl SearchConfig {
    /// `ζ ∈ [0, 88°]` to 0.5°.
    pub fn zenith() -> Self {
        Self {
            upper: 88f64.to_radians(),
            tolerance: 0.5f64.to_radians(),
            scan_points: 5,
        }
    }

    /// `ε ∈ [0, 1]` SNU to 1e-3.
    pub fn excess_noise() -> Self {
        Self {
            upper: 1.0,
            tolerance: 1e-3,
            scan_points: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    /// Largest parameter found with a positive mean rate; `None` when the
    /// rate is not positive even at the lower end.
    pub value: Option<f64>,
    /// `(parameter, mean rate)` for every evaluation, in order.
    pub evaluations: Vec<(f64, f64)>,
}

fn feasibility_search(
    search: &SearchConfig,
    mut eval: impl FnMut(f64) -> Result<f64>,
) -> Result<Feasibility> {
    if !(search.upper > 0.0) || !(search.tolerance > 0.0) || search.scan_points < 2 {
        return Err(Error::Config(format!("invalid search settings {search:?}")));
    }
    let mut evaluations = Vec::new();
    let n = search.scan_points;
    let mut scan = Vec::with_capacity(n);
    for i in 0..n {
        let x = search.upper * i as f64 / (n - 1) as f64;
        let r = eval(x)?;
        evaluations.push((x, r));
        scan.push((x, r));
        if i == 0 && r <= 0.0 {
            return Ok(Feasibility {
                value: None,
                evaluations,
            });
        }
    }
    let first_bad = scan.iter().position(|&(_, r)| r <= 0.0);
    if let Some(j) = first_bad {
        if scan[j..].iter().any(|&(_, r)| r > 0.0) {
            return Err(Error::NonMonotone(format!("feasibility scan {scan:?}")));
        }
    }
    let Some(j) = first_bad else {
        return Ok(Feasibility {
            value: Some(search.upper),
            evaluations,
        });
    };
    let (mut lo, mut hi) = (scan[j - 1].0, scan[j].0);
    while hi - lo > search.tolerance {
        let mid = 0.5 * (lo + hi);
        let r = eval(mid)?;
        evaluations.push((mid, r));
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Feasibility {
        value: Some(lo),
        evaluations,
    })
}

/// Everything needed for a satellite-downlink Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteExperiment {
    pub geometry: LinkGeometry,
    pub turbulence: TurbulenceProfile,
    pub phi_range: PhiRange,
    pub protocol: Protocol,
    pub variant: Variant,
    pub monte_carlo: MonteCarloConfig,
    pub optimization: OptimizationConfig,
    pub execution: Execution,
}

impl SatelliteExperiment {
    /// Reference link, exponential spectrum defaults, no operations.
    pub fn new(protocol: Protocol, variant: Variant) -> Self {
        Self {
            geometry: LinkGeometry::reference(),
            turbulence: TurbulenceProfile::reference(),
            phi_range: PhiRange::default(),
            protocol,
            variant,
            monte_carlo: MonteCarloConfig::default(),
            optimization: OptimizationConfig::default(),
            execution: Execution::default(),
        }
    }

    pub fn sampler(&self) -> Result<BeamSampler> {
        BeamSampler::for_link(&self.geometry, &self.turbulence, self.phi_range)
    }

    pub fn mean_key_rate(&self) -> Result<MonteCarloResult> {
        mean_key_rate(
            &self.sampler()?,
            &self.protocol,
            self.variant,
            &self.monte_carlo,
            &self.optimization,
            self.execution,
        )
    }

    /// Largest zenith angle (radians) with a positive mean rate. The same
    /// seed is used at every angle.
    pub fn max_zenith_angle(&self, search: &SearchConfig) -> Result<Feasibility> {
        if search.upper >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Config("zenith search must stay below 90°".into()));
        }
        feasibility_search(search, |zenith| {
            let mut run = self.clone();
            run.geometry.zenith = zenith;
            Ok(run.mean_key_rate()?.mean_rate)
        })
    }

    /// Largest channel excess noise with a positive mean rate. The
    /// transmissivity samples are drawn once and shared by every noise
    /// level.
    pub fn max_excess_noise(&self, search: &SearchConfig) -> Result<Feasibility> {
        self.monte_carlo.validate()?;
        let etas = sample_transmissivities(
            &self.sampler()?,
            self.monte_carlo.samples,
            self.monte_carlo.seed,
            self.execution,
        )?;
        feasibility_search(search, |epsilon| {
            let mut protocol = self.protocol.clone();
            protocol.epsilon = epsilon;
            Ok(rate_over_samples(
                &etas,
                &protocol,
                self.variant,
                &self.monte_carlo,
                &self.optimization,
                self.execution,
            )?
            .mean_rate)
        })
    }
}
