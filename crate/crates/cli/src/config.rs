//! Run configuration: a single JSON document with units in the key names.
//!
//! Unknown keys are rejected at parse time. Everything else is checked by
//! [`RunConfig::check`], which collects every violation instead of stopping
//! at the first one.

use std::path::Path;

use anyhow::{Context, Result};
use cvqkd_core::atmosphere::{LinkGeometry, PhiRange, TurbulenceProfile};
use cvqkd_core::experiment::{Method, SearchConfig};
use cvqkd_core::gaussian::{DEFAULT_DECAY, DEFAULT_SUPERMODES};
use cvqkd_core::keyrate::{DEFAULT_EPSILON, DEFAULT_XI};
use cvqkd_core::{
    Aggregation, MonteCarloConfig, OptimizationConfig, Optimum, Protocol, Scenario, Strategy, SupermodeSpectrum,
    Variant,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Optimised rate over a list of fixed attenuations.
    Fixed,
    /// Monte Carlo mean rate over satellite links.
    Satellite,
    /// Largest zenith angle with a positive mean rate.
    Zenith,
    /// Largest excess noise with a positive mean rate.
    Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: RunMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub protocol: ProtocolBlock,
    pub series: Vec<SeriesBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zenith_search: Option<ZenithSearchBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_search: Option<NoiseSearchBlock>,
    #[serde(default)]
    pub optimization: OptimizationBlock,
    #[serde(default)]
    pub monte_carlo: MonteCarloBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Single,
    Exponential,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolBlock {
    #[serde(default = "default_supermodes")]
    pub supermodes: usize,
    pub spectrum: SpectrumKind,
    /// `λ_{k+1}/λ_k = e^{−decay}`; exponential spectrum only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_snu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default)]
    pub clamp_negative_subchannels: bool,
}

fn default_supermodes() -> usize {
    DEFAULT_SUPERMODES
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    None,
    AmpOnly,
    AttAmp,
}

impl From<VariantKind> for Variant {
    fn from(v: VariantKind) -> Self {
        match v {
            VariantKind::None => Variant::None,
            VariantKind::AmpOnly => Variant::AmpOnly,
            VariantKind::AttAmp => Variant::AttAmp,
        }
    }
}

/// One curve: a protocol variant and where its operations act.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesBlock {
    pub label: String,
    pub variant: VariantKind,
    /// 1-based supermode index of the noiseless attenuator.
    #[serde(default = "first_supermode")]
    pub att_supermode: usize,
    /// 1-based supermode index of the noiseless amplifier.
    #[serde(default = "first_supermode")]
    pub amp_supermode: usize,
    /// Evaluate at these parameters instead of optimising.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<FixedPoint>,
}

fn first_supermode() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPoint {
    pub pdc_gain: f64,
    #[serde(default = "unity")]
    pub transmissivity: f64,
    #[serde(default = "unity")]
    pub amplifier_gain: f64,
}

fn unity() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelBlock {
    pub attenuation_db: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiRangeKind {
    Quarter,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBlock {
    pub altitude_km: f64,
    pub ground_altitude_m: f64,
    pub zenith_deg: f64,
    pub wavelength_nm: f64,
    pub waist_m: f64,
    pub aperture_radius_m: f64,
    pub wind_speed_m_per_s: f64,
    pub cn2_ground_m_minus_2_3: f64,
    pub phi_range: PhiRangeKind,
}

impl Default for LinkBlock {
    fn default() -> Self {
        let g = LinkGeometry::reference();
        let t = TurbulenceProfile::reference();
        Self {
            altitude_km: g.altitude / 1e3,
            ground_altitude_m: g.ground_altitude,
            zenith_deg: g.zenith.to_degrees(),
            wavelength_nm: g.wavelength * 1e9,
            waist_m: g.waist,
            aperture_radius_m: g.aperture,
            wind_speed_m_per_s: t.wind_speed,
            cn2_ground_m_minus_2_3: t.cn2_ground,
            phi_range: PhiRangeKind::Quarter,
        }
    }
}

impl LinkBlock {
    pub fn geometry(&self) -> LinkGeometry {
        LinkGeometry {
            altitude: self.altitude_km * 1e3,
            ground_altitude: self.ground_altitude_m,
            zenith: self.zenith_deg.to_radians(),
            wavelength: self.wavelength_nm * 1e-9,
            waist: self.waist_m,
            aperture: self.aperture_radius_m,
        }
    }

    pub fn turbulence(&self) -> TurbulenceProfile {
        TurbulenceProfile {
            wind_speed: self.wind_speed_m_per_s,
            cn2_ground: self.cn2_ground_m_minus_2_3,
        }
    }

    pub fn phi_range(&self) -> PhiRange {
        match self.phi_range {
            PhiRangeKind::Quarter => PhiRange::Quarter,
            PhiRangeKind::Full => PhiRange::Full,
        }
    }
}

/// Link points for satellite mode: the Cartesian product of the lists.
/// A missing list uses the value from the `link` block.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub altitude_km: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub zenith_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZenithSearchBlock {
    pub altitude_km: Vec<f64>,
    pub epsilon_snu: Vec<f64>,
    #[serde(default = "default_zenith_upper")]
    pub upper_deg: f64,
    #[serde(default = "default_zenith_tol")]
    pub tolerance_deg: f64,
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
}

fn default_zenith_upper() -> f64 {
    SearchConfig::zenith().upper.to_degrees()
}

fn default_zenith_tol() -> f64 {
    SearchConfig::zenith().tolerance.to_degrees()
}

fn default_scan_points() -> usize {
    SearchConfig::zenith().scan_points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSearchBlock {
    pub altitude_km: Vec<f64>,
    pub zenith_deg: Vec<f64>,
    #[serde(default = "default_noise_upper")]
    pub upper_snu: f64,
    #[serde(default = "default_noise_tol")]
    pub tolerance_snu: f64,
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
}

fn default_noise_upper() -> f64 {
    SearchConfig::excess_noise().upper
}

fn default_noise_tol() -> f64 {
    SearchConfig::excess_noise().tolerance
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    GridThenPolish,
    DirectSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizationBlock {
    pub pdc_gain_min: f64,
    pub pdc_gain_max: f64,
    pub pdc_gain_points: usize,
    pub transmissivity_min: f64,
    pub transmissivity_points: usize,
    pub gain_cap: f64,
    pub gain_points: usize,
    pub method: MethodKind,
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for OptimizationBlock {
    fn default() -> Self {
        let d = OptimizationConfig::default();
        Self {
            pdc_gain_min: d.pdc_gain_bounds.0,
            pdc_gain_max: d.pdc_gain_bounds.1,
            pdc_gain_points: d.pdc_gain_points,
            transmissivity_min: d.min_transmissivity,
            transmissivity_points: d.transmissivity_points,
            gain_cap: d.gain_cap,
            gain_points: d.gain_points,
            method: MethodKind::GridThenPolish,
            tolerance: d.tolerance,
            max_evaluations: d.max_evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloBlock {
    pub samples: usize,
    pub per_sample_optimization: bool,
}

impl Default for MonteCarloBlock {
    fn default() -> Self {
        let d = MonteCarloConfig::default();
        Self {
            samples: d.samples,
            per_sample_optimization: d.per_sample_optimization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: String,
    /// File-name prefix; defaults to the config file stem.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    /// Also write `(η, g*, T*, G*, R)` for every Monte Carlo sample.
    pub per_sample_records: bool,
    /// Also write the sampled beam parameters of every link point.
    pub dump_beams: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            prefix: None,
            per_sample_records: false,
            dump_beams: false,
        }
    }
}

/// Outcome of [`RunConfig::check`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    /// Defaults filled in for omitted fields.
    pub notices: Vec<String>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Reads and parses a config file. Schema errors (unknown keys, wrong
/// types, missing required fields) are returned as errors.
pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).with_context(|| format!("invalid config {}", path.display()))
}

pub fn parse(text: &str) -> Result<RunConfig> {
    Ok(serde_json::from_str(text)?)
}

fn finite_positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

fn finite_non_negative(v: f64) -> bool {
    v >= 0.0 && v.is_finite()
}

impl RunConfig {
    /// Fills omitted defaulted fields and reports each one.
    pub fn resolve(&mut self) -> Vec<String> {
        let mut notices = Vec::new();
        if self.protocol.xi.is_none() {
            self.protocol.xi = Some(DEFAULT_XI);
            notices.push(format!("protocol.xi not set; using {DEFAULT_XI}"));
        }
        if self.protocol.epsilon_snu.is_none() {
            self.protocol.epsilon_snu = Some(DEFAULT_EPSILON);
            notices.push(format!("protocol.epsilon_snu not set; using {DEFAULT_EPSILON}"));
        }
        if self.protocol.spectrum == SpectrumKind::Exponential && self.protocol.decay.is_none() {
            self.protocol.decay = Some(DEFAULT_DECAY);
            notices.push(format!("protocol.decay not set; using {DEFAULT_DECAY}"));
        }
        if self.seed.is_none() {
            self.seed = Some(0);
        }
        if self.mode != RunMode::Fixed && self.link.is_none() {
            // the check reports the missing block; keep going with defaults
            self.link = Some(LinkBlock::default());
        }
        notices
    }

    /// Full invariant check. Call after [`RunConfig::resolve`].
    pub fn check(&self) -> Report {
        let mut r = Report::default();
        let mut bad = |msg: String| r.violations.push(msg);

        let p = &self.protocol;
        if p.supermodes == 0 {
            bad("protocol.supermodes must be at least 1".into());
        }
        match (p.spectrum, p.decay) {
            (SpectrumKind::Exponential, Some(d)) if !finite_positive(d) => {
                bad(format!("protocol.decay = {d} must be positive"))
            }
            (SpectrumKind::Single | SpectrumKind::Flat, Some(_)) => {
                r.warnings.push("protocol.decay is ignored for non-exponential spectra".into())
            }
            _ => {}
        }
        if let Some(e) = p.epsilon_snu {
            if !finite_non_negative(e) {
                bad(format!("protocol.epsilon_snu = {e} must be non-negative"));
            }
        }
        if let Some(xi) = p.xi {
            if !(xi > 0.0 && xi <= 1.0) {
                bad(format!("protocol.xi = {xi} is outside (0, 1]"));
            }
        }

        if self.series.is_empty() {
            bad("series must list at least one curve".into());
        }
        for (i, s) in self.series.iter().enumerate() {
            let at = format!("series[{i}]");
            if s.label.trim().is_empty() {
                bad(format!("{at}.label must not be empty"));
            }
            if self.series[..i].iter().any(|o| o.label == s.label) {
                bad(format!("{at}.label \"{}\" is used more than once", s.label));
            }
            for (name, k) in [("att_supermode", s.att_supermode), ("amp_supermode", s.amp_supermode)] {
                if k == 0 || k > p.supermodes {
                    bad(format!("{at}.{name} = {k} is outside 1..={}", p.supermodes));
                }
            }
            if let Some(fp) = &s.fixed_point {
                if !matches!(self.mode, RunMode::Fixed | RunMode::Satellite) {
                    bad(format!("{at}.fixed_point is only supported in fixed and satellite modes"));
                }
                if !finite_positive(fp.pdc_gain) {
                    bad(format!("{at}.fixed_point.pdc_gain = {} must be positive", fp.pdc_gain));
                }
                if !(fp.transmissivity > 0.0 && fp.transmissivity <= 1.0) {
                    bad(format!(
                        "{at}.fixed_point.transmissivity = {} is outside (0, 1]",
                        fp.transmissivity
                    ));
                }
                if !(fp.amplifier_gain >= 1.0 && fp.amplifier_gain.is_finite()) {
                    bad(format!(
                        "{at}.fixed_point.amplifier_gain = {} must be at least 1",
                        fp.amplifier_gain
                    ));
                } else if fp.amplifier_gain > self.optimization.gain_cap {
                    r.warnings.push(format!(
                        "{at}.fixed_point.amplifier_gain = {} exceeds optimization.gain_cap = {}; it is \
                         lowered to the largest usable gain at run time",
                        fp.amplifier_gain, self.optimization.gain_cap
                    ));
                }
                let unused_t = s.variant != VariantKind::AttAmp && fp.transmissivity != 1.0;
                let unused_g = s.variant == VariantKind::None && fp.amplifier_gain != 1.0;
                if unused_t || unused_g {
                    r.warnings.push(format!(
                        "{at}.fixed_point sets parameters of operations the {:?} variant does not use",
                        s.variant
                    ));
                }
            }
        }

        let o = &self.optimization;
        if !(finite_positive(o.pdc_gain_min) && o.pdc_gain_max.is_finite() && o.pdc_gain_min < o.pdc_gain_max) {
            bad(format!(
                "optimization.pdc_gain_min/max = {}/{} must satisfy 0 < min < max",
                o.pdc_gain_min, o.pdc_gain_max
            ));
        }
        if !(o.transmissivity_min > 0.0 && o.transmissivity_min <= 1.0) {
            bad(format!("optimization.transmissivity_min = {} is outside (0, 1]", o.transmissivity_min));
        }
        if !(o.gain_cap >= 1.0 && o.gain_cap.is_finite()) {
            bad(format!("optimization.gain_cap = {} must be at least 1", o.gain_cap));
        }
        for (name, n) in [
            ("pdc_gain_points", o.pdc_gain_points),
            ("transmissivity_points", o.transmissivity_points),
            ("gain_points", o.gain_points),
        ] {
            if n < 2 {
                bad(format!("optimization.{name} = {n} must be at least 2"));
            }
        }
        if !finite_positive(o.tolerance) {
            bad(format!("optimization.tolerance = {} must be positive", o.tolerance));
        }
        if o.max_evaluations == 0 {
            bad("optimization.max_evaluations must be at least 1".into());
        }
        if self.monte_carlo.samples == 0 {
            bad("monte_carlo.samples must be at least 1".into());
        }

        let needs = |present: bool, block: &str, bad: &mut dyn FnMut(String)| {
            if !present {
                bad(format!("{block} block is required in {:?} mode", self.mode).to_lowercase());
            }
        };
        match self.mode {
            RunMode::Fixed => {
                needs(self.channel.is_some(), "channel", &mut bad);
                if let Some(c) = &self.channel {
                    if c.attenuation_db.is_empty() {
                        bad("channel.attenuation_db must not be empty".into());
                    }
                    for (i, db) in c.attenuation_db.iter().enumerate() {
                        if !finite_non_negative(*db) {
                            bad(format!("channel.attenuation_db[{i}] = {db} must be non-negative"));
                        }
                    }
                }
            }
            RunMode::Satellite => {
                if let Some(s) = &self.sweep {
                    check_list(&s.altitude_km, "sweep.altitude_km", finite_positive, "positive", &mut bad);
                    check_list(&s.zenith_deg, "sweep.zenith_deg", zenith_ok, "in [0, 90)", &mut bad);
                }
            }
            RunMode::Zenith => {
                needs(self.zenith_search.is_some(), "zenith_search", &mut bad);
                if let Some(z) = &self.zenith_search {
                    nonempty(&z.altitude_km, "zenith_search.altitude_km", &mut bad);
                    nonempty(&z.epsilon_snu, "zenith_search.epsilon_snu", &mut bad);
                    check_list(&z.altitude_km, "zenith_search.altitude_km", finite_positive, "positive", &mut bad);
                    check_list(
                        &z.epsilon_snu,
                        "zenith_search.epsilon_snu",
                        finite_non_negative,
                        "non-negative",
                        &mut bad,
                    );
                    if !(z.upper_deg > 0.0 && z.upper_deg < 90.0) {
                        bad(format!("zenith_search.upper_deg = {} is outside (0, 90)", z.upper_deg));
                    }
                    if !finite_positive(z.tolerance_deg) {
                        bad(format!("zenith_search.tolerance_deg = {} must be positive", z.tolerance_deg));
                    }
                    if z.scan_points < 2 {
                        bad("zenith_search.scan_points must be at least 2".into());
                    }
                }
            }
            RunMode::Noise => {
                needs(self.noise_search.is_some(), "noise_search", &mut bad);
                if let Some(n) = &self.noise_search {
                    nonempty(&n.altitude_km, "noise_search.altitude_km", &mut bad);
                    nonempty(&n.zenith_deg, "noise_search.zenith_deg", &mut bad);
                    check_list(&n.altitude_km, "noise_search.altitude_km", finite_positive, "positive", &mut bad);
                    check_list(&n.zenith_deg, "noise_search.zenith_deg", zenith_ok, "in [0, 90)", &mut bad);
                    if !finite_positive(n.upper_snu) {
                        bad(format!("noise_search.upper_snu = {} must be positive", n.upper_snu));
                    }
                    if !finite_positive(n.tolerance_snu) {
                        bad(format!("noise_search.tolerance_snu = {} must be positive", n.tolerance_snu));
                    }
                    if n.scan_points < 2 {
                        bad("noise_search.scan_points must be at least 2".into());
                    }
                }
            }
        }
        if self.mode != RunMode::Fixed {
            match &self.link {
                None => bad(format!("link block is required in {:?} mode", self.mode).to_lowercase()),
                Some(l) => check_link(l, &mut bad),
            }
        }

        let ignored = [
            ("channel", self.channel.is_some() && self.mode != RunMode::Fixed),
            ("link", self.link.is_some() && self.mode == RunMode::Fixed),
            ("sweep", self.sweep.is_some() && self.mode != RunMode::Satellite),
            ("zenith_search", self.zenith_search.is_some() && self.mode != RunMode::Zenith),
            ("noise_search", self.noise_search.is_some() && self.mode != RunMode::Noise),
        ];
        for (block, unused) in ignored {
            if unused {
                r.warnings.push(format!("{block} block is ignored in {:?} mode", self.mode).to_lowercase());
            }
        }
        r
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Protocol without operations; series add their own.
    pub fn protocol(&self) -> Result<Protocol> {
        let p = &self.protocol;
        let scenario = match p.spectrum {
            SpectrumKind::Single => Scenario::Single,
            SpectrumKind::Flat => Scenario::Flat,
            SpectrumKind::Exponential => Scenario::Exponential {
                decay: p.decay.unwrap_or(DEFAULT_DECAY),
            },
        };
        let spectrum = SupermodeSpectrum::new(scenario, p.supermodes, 1.0)?;
        let mut protocol = Protocol::baseline(spectrum);
        protocol.epsilon = p.epsilon_snu.unwrap_or(DEFAULT_EPSILON);
        protocol.xi = p.xi.unwrap_or(DEFAULT_XI);
        protocol.aggregation = if p.clamp_negative_subchannels {
            Aggregation::ClampNegative
        } else {
            Aggregation::Sum
        };
        protocol.validate()?;
        Ok(protocol)
    }

    /// Optimiser settings for one series.
    pub fn optimization(&self, series: &SeriesBlock) -> OptimizationConfig {
        let o = &self.optimization;
        let (att, amp) = (series.att_supermode - 1, series.amp_supermode - 1);
        let strategy = match series.variant {
            VariantKind::None => Strategy::default(),
            VariantKind::AmpOnly => Strategy::Symmetric { supermode: amp },
            VariantKind::AttAmp if att == amp => Strategy::Symmetric { supermode: att },
            VariantKind::AttAmp => Strategy::Asymmetric {
                attenuation: att,
                amplification: amp,
            },
        };
        OptimizationConfig {
            pdc_gain_bounds: (o.pdc_gain_min, o.pdc_gain_max),
            pdc_gain_points: o.pdc_gain_points,
            min_transmissivity: o.transmissivity_min,
            transmissivity_points: o.transmissivity_points,
            gain_cap: o.gain_cap,
            gain_points: o.gain_points,
            strategy,
            method: match o.method {
                MethodKind::GridThenPolish => Method::GridThenPolish,
                MethodKind::DirectSearch => Method::DirectSearch,
            },
            tolerance: o.tolerance,
            max_evaluations: o.max_evaluations,
        }
    }

    pub fn monte_carlo(&self) -> MonteCarloConfig {
        MonteCarloConfig {
            samples: self.monte_carlo.samples,
            seed: self.seed(),
            per_sample_optimization: self.monte_carlo.per_sample_optimization,
        }
    }
}

impl FixedPoint {
    /// The point with operations the variant lacks switched off.
    pub fn optimum(&self, variant: VariantKind) -> Optimum {
        Optimum {
            pdc_gain: self.pdc_gain,
            transmissivity: if variant == VariantKind::AttAmp {
                self.transmissivity
            } else {
                1.0
            },
            amplifier_gain: if variant == VariantKind::None {
                1.0
            } else {
                self.amplifier_gain
            },
            rate: f64::NAN,
        }
    }
}

fn zenith_ok(deg: f64) -> bool {
    (0.0..90.0).contains(&deg)
}

fn nonempty(list: &[f64], field: &str, bad: &mut dyn FnMut(String)) {
    if list.is_empty() {
        bad(format!("{field} must not be empty"));
    }
}

fn check_list(list: &[f64], field: &str, ok: fn(f64) -> bool, expect: &str, bad: &mut dyn FnMut(String)) {
    for (i, v) in list.iter().enumerate() {
        if !ok(*v) {
            bad(format!("{field}[{i}] = {v} must be {expect}"));
        }
    }
}

fn check_link(l: &LinkBlock, bad: &mut dyn FnMut(String)) {
    if !(finite_positive(l.altitude_km) && l.altitude_km * 1e3 > l.ground_altitude_m) {
        bad(format!(
            "link.altitude_km = {} must exceed link.ground_altitude_m = {}",
            l.altitude_km, l.ground_altitude_m
        ));
    }
    if !finite_non_negative(l.ground_altitude_m) {
        bad(format!("link.ground_altitude_m = {} must be non-negative", l.ground_altitude_m));
    }
    if !zenith_ok(l.zenith_deg) {
        bad(format!("link.zenith_deg = {} is outside [0, 90)", l.zenith_deg));
    }
    for (name, v) in [
        ("wavelength_nm", l.wavelength_nm),
        ("waist_m", l.waist_m),
        ("aperture_radius_m", l.aperture_radius_m),
    ] {
        if !finite_positive(v) {
            bad(format!("link.{name} = {v} must be positive"));
        }
    }
    for (name, v) in [
        ("wind_speed_m_per_s", l.wind_speed_m_per_s),
        ("cn2_ground_m_minus_2_3", l.cn2_ground_m_minus_2_3),
    ] {
        if !finite_non_negative(v) {
            bad(format!("link.{name} = {v} must be non-negative"));
        }
    }
}
