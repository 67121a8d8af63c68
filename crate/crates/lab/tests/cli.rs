use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use tempfile::TempDir;

fn lab(args: &[&str], config: &str, dir: &Path) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_dynkin-lab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL_SYNTH: &str = r#"{
  "seed": 3,
  "model": {"kind": "stable", "beta": 1.5, "c": 1.0},
  "synth": {"field": "V", "alpha": 1.0, "t": 0.5, "cutoff": 40.0, "modes": 512,
            "points": 32, "replications": 64, "cov_lags": [0, 1, 4]}
}"#;

#[test]
fn synth_outputs_are_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        let o = lab(&["synth"], SMALL_SYNTH, d.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["field.csv", "covariance.csv", "summary.txt"] {
        let read = |d: &TempDir| fs::read_to_string(d.path().join("out").join(name)).unwrap();
        // The header names the config path, which differs between the two runs.
        let strip = |s: String| s.lines().filter(|l| !l.starts_with("# config_path=")).collect::<Vec<_>>().join("\n");
        assert_eq!(strip(read(&a)), strip(read(&b)), "{name}");
    }
}

#[test]
fn csv_files_carry_provenance_header() {
    let d = TempDir::new().unwrap();
    let o = lab(&["synth", "--seed", "9"], SMALL_SYNTH, d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(d.path().join("out/covariance.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# dynkin-lab ") && lines[0].ends_with(" synth"));
    assert!(lines.contains(&"# seed=9"));
    assert!(lines.contains(&"# overrides=seed=9"));
    assert!(lines.iter().any(|l| l.starts_with("# config={")));
    assert!(lines.contains(&"lag,empirical_cov,exact_cov,stderr"));
    let rows = lines.iter().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 4);
}

#[test]
fn unknown_key_is_a_usage_error_naming_the_key() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"model": {"kind": "brownian"}, "synth": {"modes": 64, "colour": "red"}}"#;
    let o = lab(&["synth"], cfg, d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("synth.colour"), "{}", stderr(&o));
}

#[test]
fn beta_out_of_range_is_rejected() {
    let d = TempDir::new().unwrap();
    let o = lab(&["check"], r#"{"model": {"kind": "stable", "beta": 2.5, "c": 1.0}}"#, d.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("model.beta") && e.contains("beta must lie in (0,2]"), "{e}");
}

#[test]
fn syntax_error_reports_line() {
    let d = TempDir::new().unwrap();
    let o = lab(&["check"], "{\n  \"model\": {\"kind\": \"brownian\",}\n}", d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_dynkin-lab"))
        .args(["check", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_dalang_for_stable_three_halves() {
    let d = TempDir::new().unwrap();
    let o = lab(&["check"], r#"{"model": {"kind": "stable", "beta": 1.5, "c": 1.0}}"#, d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("dalang: satisfied-numerically"), "{}", stdout(&o));
    assert!(d.path().join("out/condition.csv").exists());
}

#[test]
fn divergent_potential_exits_with_non_convergence() {
    let d = TempDir::new().unwrap();
    let cfg =
        r#"{"model": {"kind": "stable", "beta": 1.0, "c": 1.0}, "kernel": {"alpha": [1.0], "t": [1.0], "r": [0.0]}}"#;
    let o = lab(&["kernel"], cfg, d.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let e = stderr(&o);
    assert!(e.contains("kernel") && e.contains("config.json"), "{e}");
}

#[test]
fn kernel_suite_passes_quickly_on_brownian() {
    let d = TempDir::new().unwrap();
    let start = Instant::now();
    let o = lab(&["verify", "--suite", "kernels"], r#"{"model": {"kind": "brownian", "kappa": 1.0}}"#, d.path());
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let table = fs::read_to_string(d.path().join("out/verify.csv")).unwrap();
    assert!(table.lines().filter(|l| l.starts_with("kernels,")).all(|l| l.contains(",pass,")), "{table}");
}

#[test]
fn too_few_paths_is_rejected() {
    let d = TempDir::new().unwrap();
    let o = lab(&["synth", "--paths", "5"], SMALL_SYNTH, d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--paths"));
}
