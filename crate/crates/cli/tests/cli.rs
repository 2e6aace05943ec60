use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_cvqkd-sat");

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn recipes() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(repo_root().join("configs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
}

fn cvqkd(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const FIXED: &str = r#"{
    "mode": "fixed",
    "seed": 3,
    "protocol": { "spectrum": "exponential", "epsilon_snu": 0.05, "xi": 0.95,
                  "clamp_negative_subchannels": true },
    "series": [
        { "label": "baseline", "variant": "none" },
        { "label": "att_amp", "variant": "att_amp" }
    ],
    "channel": { "attenuation_db": [0.5, 3, 10, 17.25, 30] }
}"#;

const SATELLITE: &str = r#"{
    "mode": "satellite",
    "seed": 11,
    "protocol": { "supermodes": 3, "spectrum": "exponential", "decay": 0.5,
                  "epsilon_snu": 0.05, "xi": 0.95, "clamp_negative_subchannels": true },
    "series": [ { "label": "baseline", "variant": "none" } ],
    "link": { "altitude_km": 500, "zenith_deg": 30 },
    "monte_carlo": { "samples": 8 },
    "output": { "per_sample_records": true, "dump_beams": true }
}"#;

/// Data rows of a CSV written by the tool (comment lines skipped).
fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let headers = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (headers, rows)
}

fn column(headers: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let j = headers.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[j].parse().unwrap()).collect()
}

#[test]
fn every_recipe_validates_cleanly() {
    let recipes = recipes();
    assert!(recipes.len() >= 6);
    for path in recipes {
        let out = cvqkd(&["validate", path.to_str().unwrap()]);
        let text = stdout(&out);
        assert!(out.status.success(), "{}: {text}", path.display());
        assert!(text.contains("0 violation(s), 0 warning(s)"), "{}: {text}", path.display());
    }
}

#[test]
fn validation_names_offending_field_and_range() {
    let dir = TempDir::new().unwrap();
    let text = FIXED.replace(
        r#""variant": "att_amp""#,
        r#""variant": "att_amp", "fixed_point": { "pdc_gain": 1.0, "transmissivity": 1.5 }"#,
    );
    let path = write_config(&dir, "bad.json", &text);
    let out = cvqkd(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(
        text.lines()
            .any(|l| l.starts_with("violation:") && l.contains("series[1].fixed_point.transmissivity = 1.5") && l.contains("(0, 1]")),
        "{text}"
    );
    // A run of an invalid file is refused before any work.
    let run = cvqkd(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(!dir.path().join("bad.csv").exists());
}

#[test]
fn gain_above_cap_is_only_a_warning() {
    let dir = TempDir::new().unwrap();
    let text = FIXED.replace(
        r#""variant": "att_amp""#,
        r#""variant": "amp_only", "fixed_point": { "pdc_gain": 1.0, "amplifier_gain": 40.0 }"#,
    );
    let path = write_config(&dir, "cap.json", &text);
    let out = cvqkd(&["validate", path.to_str().unwrap()]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().any(|l| l.starts_with("warning:") && l.contains("gain_cap")), "{text}");
}

#[test]
fn unknown_keys_are_hard_errors() {
    let dir = TempDir::new().unwrap();
    let text = FIXED.replace(r#""seed": 3,"#, r#""seed": 3, "seeed": 4,"#);
    let path = write_config(&dir, "typo.json", &text);
    let out = cvqkd(&["validate", path.to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    let all = format!("{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
    assert!(all.contains("seeed"), "{all}");
    let run = cvqkd(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn missing_defaults_are_announced() {
    let dir = TempDir::new().unwrap();
    let text = FIXED.replace(r#", "xi": 0.95"#, "");
    let path = write_config(&dir, "noxi.json", &text);
    let out = cvqkd(&["validate", path.to_str().unwrap()]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().any(|l| l.starts_with("notice:") && l.contains("xi") && l.contains("0.95")), "{text}");
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "fixed.json", FIXED);
    let out = cvqkd(&["run", path.to_str().unwrap(), "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = cvqkd(&["run", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn fixed_mode_table() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "fixed.json", FIXED);
    let out = cvqkd(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--threads", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("fixed.csv");
    let (headers, rows) = read_table(&csv);
    assert_eq!(rows.len(), 5);
    for name in ["baseline_bits_per_pulse", "att_amp_pdc_gain", "att_amp_transmissivity", "att_amp_amplifier_gain"] {
        assert!(headers.iter().any(|h| h == name), "{headers:?}");
    }
    // The linear column is the exact conversion of the dB column.
    let db = column(&headers, &rows, "attenuation_db");
    let eta = column(&headers, &rows, "eta");
    for (d, e) in db.iter().zip(&eta) {
        assert!((-10.0 * e.log10() - d).abs() <= 1e-12 * d.max(1.0), "{d} dB vs {e}");
        assert!((10f64.powf(-d / 10.0) - e).abs() <= 1e-12 * e);
    }
    let base = column(&headers, &rows, "baseline_bits_per_pulse");
    let improved = column(&headers, &rows, "att_amp_bits_per_pulse");
    for (b, i) in base.iter().zip(&improved) {
        assert!(*i >= b - 1e-9, "{i} < {b}");
    }
    assert!(base[0] > 0.0 && base.windows(2).all(|w| w[1] <= w[0]), "{base:?}");
}

#[test]
fn header_records_seed_and_resolved_config() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "fixed.json", &FIXED.replace(r#", "xi": 0.95"#, ""));
    let out = cvqkd(&["run", path.to_str().unwrap(), "--seed", "42", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("fixed.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# cvqkd-sat "));
    assert_eq!(lines[1], "# seed: 42");
    let json = lines[2].strip_prefix("# config: ").unwrap();
    let config: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(config["seed"], 42);
    assert_eq!(config["mode"], "fixed");
    // The default filled in by resolution is written out explicitly.
    assert_eq!(config["protocol"]["xi"], 0.95);
    assert_eq!(lines[3].split(',').next(), Some("attenuation_db"));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "sat.json", SATELLITE);
    let run = || {
        let out = cvqkd(&["run", path.to_str().unwrap(), "--seed", "7", "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csv_files(dir.path())
    };
    let first = run();
    let second = run();
    assert_eq!(first.len(), 3, "{:?}", first.iter().map(|f| &f.0).collect::<Vec<_>>());
    assert_eq!(first, second);

    // Thread count does not change the numbers.
    let out = cvqkd(&["run", path.to_str().unwrap(), "--seed", "7", "--out", dir.path().to_str().unwrap(), "--threads", "1"]);
    assert!(out.status.success());
    let sequential = csv_files(dir.path());
    assert_eq!(first, sequential);
}

fn csv_files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    files.iter().map(|p| (p.clone(), std::fs::read(p).unwrap())).collect()
}

#[test]
fn satellite_run_writes_samples_and_beams() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "sat.json", SATELLITE);
    let out = cvqkd(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let (headers, rows) = read_table(&dir.path().join("sat_beams_000.csv"));
    assert_eq!(headers, ["x", "y", "theta1", "theta2", "phi", "W1", "W2", "eta"]);
    assert_eq!(rows.len(), 8);
    let eta_beams = column(&headers, &rows, "eta");
    assert!(eta_beams.iter().all(|e| (0.0..=1.0).contains(e)));

    let (sample_headers, sample_rows) = read_table(&dir.path().join("sat_samples.csv"));
    assert_eq!(sample_rows.len(), 8);
    let eta_samples = column(&sample_headers, &sample_rows, "eta");
    assert_eq!(eta_beams, eta_samples);

    let (headers, rows) = read_table(&dir.path().join("sat.csv"));
    assert_eq!(rows.len(), 1);
    let mean = column(&headers, &rows, "baseline_bits_per_pulse")[0];
    let per_sample = column(&sample_headers, &sample_rows, "bits_per_pulse");
    let expected = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
    assert!((mean - expected).abs() <= 1e-12 * expected.abs().max(1e-300), "{mean} vs {expected}");
}

/// Reruns a recipe at 20 samples and compares with the stored output.
fn check_golden(name: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let dir = TempDir::new().unwrap();
    let config = repo_root().join("configs").join(format!("{name}.json"));
    let out = cvqkd(&["run", config.to_str().unwrap(), "--samples", "20", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.csv"));
    let (gh, grows) = read_table(&golden);
    let (h, rows) = read_table(&dir.path().join(format!("{name}.csv")));
    assert_eq!(h, gh);
    assert_eq!(rows.len(), grows.len());
    for (r, g) in rows.iter().zip(&grows) {
        for ((a, b), col) in r.iter().zip(g).zip(&h) {
            if a.is_empty() || b.is_empty() {
                assert_eq!(a, b, "{name} {col}");
                continue;
            }
            let (x, y): (f64, f64) = (a.parse().unwrap(), b.parse().unwrap());
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-12), "{name} {col}: {x} vs golden {y}");
        }
    }
    (h, rows)
}

fn assert_dominates(name: &str, headers: &[String], rows: &[Vec<String>], better: &str, worse: &str) {
    let b = column(headers, rows, better);
    let w = column(headers, rows, worse);
    for (i, (x, y)) in b.iter().zip(&w).enumerate() {
        assert!(*x >= y - 1e-6, "{name} row {i}: {better} = {x} < {worse} = {y}");
    }
}

#[test]
fn golden_zenith_sweeps() {
    for name in ["zenith_sweep_single", "zenith_sweep_exponential", "zenith_sweep_flat"] {
        let (h, rows) = check_golden(name);
        assert_dominates(name, &h, &rows, "att_amp_bits_per_pulse", "amp_bits_per_pulse");
        assert_dominates(name, &h, &rows, "amp_bits_per_pulse", "baseline_bits_per_pulse");
        // Attenuation grows with zenith angle along each altitude.
        let db = column(&h, &rows, "mean_attenuation_db");
        let alt = column(&h, &rows, "altitude_km");
        for i in 1..rows.len() {
            if alt[i] == alt[i - 1] {
                assert!(db[i] > db[i - 1], "{name} row {i}");
            }
        }
    }
}

#[test]
fn golden_placement() {
    let (h, rows) = check_golden("zenith_sweep_placement");
    assert_dominates("zenith_sweep_placement", &h, &rows, "supermode_1_bits_per_pulse", "supermode_2_bits_per_pulse");
    assert_dominates("zenith_sweep_placement", &h, &rows, "supermode_1_bits_per_pulse", "supermode_3_bits_per_pulse");
}

#[test]
fn golden_zenith_search() {
    let (h, rows) = check_golden("max_zenith_angle");
    assert_dominates("max_zenith_angle", &h, &rows, "att_amp_zeta_max_deg", "baseline_zeta_max_deg");
}

#[test]
fn golden_noise_search() {
    let (h, rows) = check_golden("max_excess_noise");
    assert_dominates("max_excess_noise", &h, &rows, "att_amp_epsilon_max_snu", "baseline_epsilon_max_snu");
}
