//! Mode executors and the `run` / `validate` entry points.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cvqkd_core::atmosphere::{BeamSampler, LinkGeometry};
use cvqkd_core::exec::map_indexed;
use cvqkd_core::experiment::{
    optimize_rate, rate_at, rate_over_samples, sample_transmissivities, SampleRecord, SearchConfig,
};
use cvqkd_core::{Execution, MonteCarloResult, Optimum, Protocol, SatelliteExperiment, Variant};

use crate::config::{self, Report, RunConfig, RunMode, SeriesBlock};
use crate::output::{write_csv, Cell, Table};

/// Configuration problem (as opposed to a numerical failure at run time).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Loads, resolves and applies overrides; returns the config and its check.
pub fn prepare(path: &Path, overrides: &Overrides) -> Result<(RunConfig, Report)> {
    let mut config = config::load(path).map_err(|e| ConfigError(format!("{e:#}")))?;
    if let Some(seed) = overrides.seed {
        config.seed = Some(seed);
    }
    if let Some(samples) = overrides.samples {
        config.monte_carlo.samples = samples;
    }
    if let Some(out) = &overrides.out {
        config.output.directory = out.display().to_string();
    }
    if config.output.prefix.is_none() {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        config.output.prefix = Some(stem.to_string());
    }
    let notices = config.resolve();
    let mut report = config.check();
    report.notices = notices;
    Ok((config, report))
}

/// Checks a config file without running it.
pub fn validate(path: &Path) -> Result<Report> {
    match prepare(path, &Overrides::default()) {
        Ok((_, report)) => Ok(report),
        Err(e) if e.is::<ConfigError>() => Ok(Report {
            violations: vec![e.to_string()],
            ..Report::default()
        }),
        Err(e) => Err(e),
    }
}

/// Executes a config file and writes its CSV outputs; returns the tables
/// and the files written.
pub fn run(path: &Path, overrides: &Overrides, execution: Execution) -> Result<(Vec<Table>, Vec<PathBuf>)> {
    let (config, report) = prepare(path, overrides)?;
    for n in &report.notices {
        log::info!("{n}");
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    if !report.is_valid() {
        return Err(ConfigError(format!(
            "{} configuration violation(s):\n  {}",
            report.violations.len(),
            report.violations.join("\n  ")
        ))
        .into());
    }
    let tables = execute(&config, execution)?;
    let dir = PathBuf::from(&config.output.directory);
    let prefix = config.output.prefix.clone().unwrap_or_default();
    let mut written = Vec::new();
    for t in &tables {
        written.push(write_csv(&dir, &prefix, t, &config)?);
    }
    Ok((tables, written))
}

/// Runs the selected mode. The first table is the summary.
pub fn execute(config: &RunConfig, execution: Execution) -> Result<Vec<Table>> {
    let protocol = config.protocol()?;
    match config.mode {
        RunMode::Fixed => fixed(config, &protocol),
        RunMode::Satellite => satellite(config, &protocol, execution),
        RunMode::Zenith => zenith(config, &protocol, execution),
        RunMode::Noise => noise(config, &protocol, execution),
    }
}

fn column(series: &SeriesBlock, quantity: &str) -> String {
    format!("{}_{quantity}", series.label)
}

fn fixed(config: &RunConfig, protocol: &Protocol) -> Result<Vec<Table>> {
    let Some(channel) = &config.channel else {
        bail!(ConfigError("channel block is required in fixed mode".into()));
    };
    let mut headers = vec!["attenuation_db".to_string(), "eta".to_string()];
    for q in ["bits_per_pulse", "pdc_gain", "transmissivity", "amplifier_gain"] {
        headers.extend(config.series.iter().map(|s| column(s, q)));
    }
    let mut table = Table::new("", headers);
    for &db in &channel.attenuation_db {
        let eta = cvqkd_core::atmosphere::db_to_linear(db);
        log::info!("fixed channel at {db} dB");
        let optima: Vec<Optimum> = config
            .series
            .iter()
            .map(|s| evaluate(eta, protocol, s, config))
            .collect::<Result<_>>()?;
        let mut row = vec![Cell::Num(db), Cell::Num(eta)];
        row.extend(optima.iter().map(|o| Cell::Num(o.rate)));
        row.extend(optima.iter().map(|o| Cell::Num(o.pdc_gain)));
        row.extend(optima.iter().map(|o| Cell::Num(o.transmissivity)));
        row.extend(optima.iter().map(|o| Cell::Num(o.amplifier_gain)));
        table.push(row);
    }
    Ok(vec![table])
}

/// Optimum (or the pinned point) of one series at transmissivity `eta`.
fn evaluate(eta: f64, protocol: &Protocol, series: &SeriesBlock, config: &RunConfig) -> Result<Optimum> {
    let opt = config.optimization(series);
    Ok(match &series.fixed_point {
        Some(fp) => {
            let point = fp.optimum(series.variant);
            Optimum {
                rate: rate_at(eta, protocol, &point, &opt)?,
                ..point
            }
        }
        None => optimize_rate(eta, protocol, Variant::from(series.variant), &opt)?,
    })
}

fn link_points(config: &RunConfig) -> Vec<(f64, f64)> {
    let link = config.link.clone().unwrap_or_default();
    let sweep = config.sweep.clone().unwrap_or_default();
    let altitudes = if sweep.altitude_km.is_empty() {
        vec![link.altitude_km]
    } else {
        sweep.altitude_km
    };
    let zeniths = if sweep.zenith_deg.is_empty() {
        vec![link.zenith_deg]
    } else {
        sweep.zenith_deg
    };
    altitudes
        .iter()
        .flat_map(|&h| zeniths.iter().map(move |&z| (h, z)))
        .collect()
}

fn geometry(config: &RunConfig, altitude_km: f64, zenith_deg: f64) -> LinkGeometry {
    let mut g = config.link.clone().unwrap_or_default().geometry();
    g.altitude = altitude_km * 1e3;
    g.zenith = zenith_deg.to_radians();
    g
}

fn satellite(config: &RunConfig, protocol: &Protocol, execution: Execution) -> Result<Vec<Table>> {
    let link = config.link.clone().unwrap_or_default();
    let mc = config.monte_carlo();
    let mut headers = vec![
        "altitude_km".to_string(),
        "zenith_deg".to_string(),
        "mean_attenuation_db".to_string(),
    ];
    headers.extend(config.series.iter().map(|s| column(s, "bits_per_pulse")));
    headers.extend(config.series.iter().map(|s| column(s, "std_error")));
    let mut summary = Table::new("", headers);
    let mut samples = Table::new(
        "_samples",
        [
            "altitude_km",
            "zenith_deg",
            "series",
            "sample",
            "eta",
            "pdc_gain",
            "transmissivity",
            "amplifier_gain",
            "bits_per_pulse",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut beams = Vec::new();

    for (i, (altitude_km, zenith_deg)) in link_points(config).into_iter().enumerate() {
        let geom = geometry(config, altitude_km, zenith_deg);
        let sampler = BeamSampler::for_link(&geom, &link.turbulence(), link.phi_range())?;
        // one set of transmissivities shared by every series
        let etas = sample_transmissivities(&sampler, mc.samples, mc.seed, execution)?;
        let mut results = Vec::with_capacity(config.series.len());
        for s in &config.series {
            log::info!("satellite link H = {altitude_km} km, ζ = {zenith_deg}°: series {}", s.label);
            let result = match &s.fixed_point {
                None => rate_over_samples(
                    &etas,
                    protocol,
                    Variant::from(s.variant),
                    &mc,
                    &config.optimization(s),
                    execution,
                )?,
                Some(_) => pinned_over_samples(&etas, protocol, s, config, execution)?,
            };
            if config.output.per_sample_records {
                for (n, r) in result.records.iter().enumerate() {
                    samples.push(vec![
                        Cell::Num(altitude_km),
                        Cell::Num(zenith_deg),
                        Cell::Text(s.label.clone()),
                        Cell::Int(n as u64),
                        Cell::Num(r.eta),
                        Cell::Num(r.optimum.pdc_gain),
                        Cell::Num(r.optimum.transmissivity),
                        Cell::Num(r.optimum.amplifier_gain),
                        Cell::Num(r.optimum.rate),
                    ]);
                }
            }
            results.push(result);
        }
        let mut row = vec![
            Cell::Num(altitude_km),
            Cell::Num(zenith_deg),
            Cell::Num(results[0].mean_attenuation_db),
        ];
        row.extend(results.iter().map(|r| Cell::Num(r.mean_rate)));
        row.extend(results.iter().map(|r| Cell::Num(r.std_error)));
        summary.push(row);

        if config.output.dump_beams {
            let mut t = Table::new(
                format!("_beams_{i:03}"),
                ["x", "y", "theta1", "theta2", "phi", "W1", "W2", "eta"]
                    .map(String::from)
                    .to_vec(),
            );
            let draws = map_indexed(mc.samples, execution, |n| {
                Ok(sampler.sample_indexed(mc.seed, n as u64)?)
            })?;
            for b in draws {
                t.push([b.x, b.y, b.theta1, b.theta2, b.phi, b.w1, b.w2, b.eta].map(Cell::Num).to_vec());
            }
            beams.push(t);
        }
    }
    let mut tables = vec![summary];
    if config.output.per_sample_records {
        tables.push(samples);
    }
    tables.extend(beams);
    Ok(tables)
}

/// Mean rate at a pinned `{g, T, G}` over transmissivity samples.
fn pinned_over_samples(
    etas: &[f64],
    protocol: &Protocol,
    series: &SeriesBlock,
    config: &RunConfig,
    execution: Execution,
) -> Result<MonteCarloResult> {
    let records = map_indexed(etas.len(), execution, |i| {
        let optimum = evaluate(etas[i], protocol, series, config).map_err(|e| match e.downcast::<cvqkd_core::Error>() {
            Ok(core) => core,
            Err(other) => cvqkd_core::Error::Numerical(format!("{other:#}")),
        })?;
        Ok(SampleRecord { eta: etas[i], optimum })
    })?;
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
        mean_attenuation_db: cvqkd_core::atmosphere::mean_attenuation_db(etas)?,
        records,
    })
}

fn experiment(
    config: &RunConfig,
    protocol: &Protocol,
    series: &SeriesBlock,
    geometry: LinkGeometry,
    execution: Execution,
) -> SatelliteExperiment {
    let link = config.link.clone().unwrap_or_default();
    let mut run = SatelliteExperiment::new(protocol.clone(), Variant::from(series.variant));
    run.geometry = geometry;
    run.turbulence = link.turbulence();
    run.phi_range = link.phi_range();
    run.monte_carlo = config.monte_carlo();
    run.optimization = config.optimization(series);
    run.execution = execution;
    run
}

fn zenith(config: &RunConfig, protocol: &Protocol, execution: Execution) -> Result<Vec<Table>> {
    let Some(z) = &config.zenith_search else {
        bail!(ConfigError("zenith_search block is required in zenith mode".into()));
    };
    let search = SearchConfig {
        upper: z.upper_deg.to_radians(),
        tolerance: z.tolerance_deg.to_radians(),
        scan_points: z.scan_points,
    };
    let link = config.link.clone().unwrap_or_default();
    let mut headers = vec!["altitude_km".to_string(), "epsilon_snu".to_string()];
    headers.extend(config.series.iter().map(|s| column(s, "zeta_max_deg")));
    let mut table = Table::new("", headers);
    for &altitude_km in &z.altitude_km {
        for &epsilon in &z.epsilon_snu {
            let mut row = vec![Cell::Num(altitude_km), Cell::Num(epsilon)];
            for s in &config.series {
                log::info!("ζ_max search: H = {altitude_km} km, ε = {epsilon}, series {}", s.label);
                let mut p = protocol.clone();
                p.epsilon = epsilon;
                let run = experiment(config, &p, s, geometry(config, altitude_km, link.zenith_deg), execution);
                let found = run
                    .max_zenith_angle(&search)
                    .with_context(|| format!("H = {altitude_km} km, ε = {epsilon}, series {}", s.label))?;
                row.push(Cell::from(found.value.map(f64::to_degrees)));
            }
            table.push(row);
        }
    }
    Ok(vec![table])
}

fn noise(config: &RunConfig, protocol: &Protocol, execution: Execution) -> Result<Vec<Table>> {
    let Some(n) = &config.noise_search else {
        bail!(ConfigError("noise_search block is required in noise mode".into()));
    };
    let search = SearchConfig {
        upper: n.upper_snu,
        tolerance: n.tolerance_snu,
        scan_points: n.scan_points,
    };
    let mut headers = vec!["altitude_km".to_string(), "zenith_deg".to_string()];
    headers.extend(config.series.iter().map(|s| column(s, "epsilon_max_snu")));
    let mut table = Table::new("", headers);
    for &altitude_km in &n.altitude_km {
        for &zenith_deg in &n.zenith_deg {
            let mut row = vec![Cell::Num(altitude_km), Cell::Num(zenith_deg)];
            for s in &config.series {
                log::info!("ε_max search: H = {altitude_km} km, ζ = {zenith_deg}°, series {}", s.label);
                let run = experiment(config, protocol, s, geometry(config, altitude_km, zenith_deg), execution);
                let found = run
                    .max_excess_noise(&search)
                    .with_context(|| format!("H = {altitude_km} km, ζ = {zenith_deg}°, series {}", s.label))?;
                row.push(Cell::from(found.value));
            }
            table.push(row);
        }
    }
    Ok(vec![table])
}
