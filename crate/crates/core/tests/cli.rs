use std::path::Path;
use std::process::{Command, Output};

use gyroless::harness::{run_scenario, ScenarioConfig, CSV_HEADER};

fn gyroless(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gyroless"))
        .args(args)
        .current_dir(dir)
        .env_remove("GYROLESS_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_writes_csv_summary_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"t_end": 2, "sensor": {"seed": 5}}"#,
    );
    let out = gyroless(
        &[
            "simulate",
            &cfg,
            "--out",
            "run.csv",
            "--summary",
            "run.json",
            "--gnuplot",
            "run.gp",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r.split(',').count() == 20));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap())
            .unwrap();
    assert_eq!(summary["seed"], 5);
    assert!(summary["certificate"]["k_star"].as_f64().unwrap() > 0.0);
    let script = std::fs::read_to_string(dir.path().join("run.gp")).unwrap();
    assert!(script.contains("\"run.csv\""));
}

#[test]
fn csv_values_round_trip() {
    let mut cfg = ScenarioConfig::new(1.0);
    cfg.sensor.seed = 9;
    let run = run_scenario(&cfg).unwrap();
    let csv = gyroless::harness::csv_string(&run);
    let last: Vec<f64> = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let s = run.samples.last().unwrap();
    assert_eq!(last[0], s.t);
    assert_eq!(last[4], s.estimate.omega_hat[0]);
    assert_eq!(last[19], s.estimate.b_hat[2]);
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"t_end": 1, "sensor": {"seed": 1}}"#,
    );
    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gyroless"));
        cmd.args(["simulate", &cfg])
            .args(extra)
            .current_dir(dir.path());
        match env {
            Some(v) => cmd.env("GYROLESS_SEED", v),
            None => cmd.env_remove("GYROLESS_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let config_seed = run(&[], None);
    let env_seed = run(&[], Some("2"));
    let flag_seed = run(&["--seed", "2"], Some("3"));
    let env_three = run(&[], Some("3"));
    assert_ne!(config_seed, env_seed);
    assert_eq!(env_seed, flag_seed);
    assert_ne!(flag_seed, env_three);

    let bad = Command::new(env!("CARGO_BIN_EXE_gyroless"))
        .args(["simulate", &cfg])
        .env("GYROLESS_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for (i, text) in [
        r#"{"t_end": 1, "bogus": 0}"#,
        r#"{"t_end": 1, "gains": {"alpha": 3}}"#,
        r#"{"t_end": 1, "refs": {"a": [1, 0, 0], "b": [2, 0, 0]}}"#,
        r#"{"t_end": 1, "inertia": [1, 1, 5]}"#,
        r#"{"t_end": 1, "sensor": {"noise_sigma": -1}}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write(dir.path(), &format!("c{i}.json"), text);
        let out = gyroless(&["simulate", &cfg], dir.path());
        assert_eq!(out.status.code(), Some(1), "{text}");
        assert!(out.stdout.is_empty(), "no output before validation: {text}");
    }
    let out = gyroless(&["simulate", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = gyroless(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn certificate_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"t_end": 1}"#);
    let out = gyroless(&["certificate", &cfg], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().any(|l| l.starts_with("k_star: ")));
    let out = gyroless(&["certificate", &cfg, "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["alpha"], 1.0);
}

#[test]
fn sweep_subcommand_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"t_end": 4, "sensor": {"noise_sigma": 0}}"#,
    );
    let out = gyroless(
        &["sweep", &cfg, "--axis", "k", "--values", "3x,1.2x,2x"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(values, ["3x", "1.2x", "2x"]);

    let out = gyroless(
        &["sweep", &cfg, "--axis", "p", "--values", "0,1.2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1.2"));
    let out = gyroless(&["sweep", &cfg, "--axis", "q", "--values", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_subcommand_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = gyroless(&["verify"], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn zoh_hold_converges_at_fast_sampling() {
    // holding samples adds a half-period lag, so it needs a short sensor period
    let cfg = ScenarioConfig::from_json(
        r#"{"t_end": 5, "dt_sensor": 0.002, "sensor": {"noise_sigma": 0}, "measurement_hold": "zoh"}"#,
    )
    .unwrap();
    let run = run_scenario(&cfg).unwrap();
    assert!(run.decay.rate < 0.0);
    assert!(run.terminal_error() < 1e-2 * run.samples[0].error.omega_tilde.norm());
}
