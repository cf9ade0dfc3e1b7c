// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Exit codes, report schema and reproducibility of the `simulate` binary.

use std::path::Path;
use std::process::Command;

fn simulate(dir: &Path, config: &str, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_simulate"))
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

const SMALL_FIG2A: &str = r#"{"preset": "fig2a", "n_traj": 40, "gamma": 2.0, "n_aux": [2], "t_max": 0.05, "record_stride": 25, "workers": 1}"#;

#[test]
fn passing_run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, stdout) = simulate(dir.path(), r#"{"preset": "fig3"}"#, &["--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("fig3_report.json")).unwrap()).unwrap();
    for key in ["preset", "seed", "tolerances", "deviations", "pass"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["pass"], true);
    let csv = std::fs::read_to_string(out.join("fig3_correlation_ct1.csv")).unwrap();
    assert!(csv.starts_with("t,correlation_mean,correlation_stderr,exp_mean,exp_stderr\n"));
}

#[test]
fn tolerance_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, _) = simulate(
        dir.path(),
        r#"{"preset": "fig3", "abs_tol": 1e-9}"#,
        &["--out", out.to_str().unwrap()],
    );
    assert_eq!(code, 1);
}

#[test]
fn errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(simulate(dir.path(), r#"{"preset": "fig9"}"#, &[]).0, 2);
    assert_eq!(simulate(dir.path(), r#"{"preset": "fig3", "bogus": 1}"#, &[]).0, 2);
    assert_eq!(simulate(dir.path(), r#"{"preset": "fig3"}"#, &["--preset", "nope"]).0, 2);
    assert_eq!(simulate(dir.path(), "not json", &[]).0, 2);
}

#[test]
fn identical_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        simulate(dir.path(), SMALL_FIG2A, &["--out", out.to_str().unwrap(), "--seed", seed]);
        std::fs::read(out.join("fig2a_N2_nplus1.csv")).unwrap()
    };
    let a = csv("a", "11");
    assert_eq!(a, csv("b", "11"));
    assert_ne!(a, csv("c", "12"));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = |sub: &str, workers: &str| {
        let out = dir.path().join(sub);
        simulate(dir.path(), SMALL_FIG2A, &["--out", out.to_str().unwrap(), "--workers", workers]);
        std::fs::read(out.join("fig2a_N2_nplus1.csv")).unwrap()
    };
    assert_eq!(csv("one", "1"), csv("three", "3"));
}

#[test]
fn single_trajectory_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = SMALL_FIG2A.replace("\"n_traj\": 40", "\"n_traj\": 1");
    let (code, stdout) = simulate(dir.path(), &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.contains("insufficient statistics"), "{stdout}");
}
