//! End-to-end tests of the `ssmred` binary: exit codes, determinism and
//! output formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ssmred"))
}

fn write_config(dir: &Path, value: &serde_json::Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn sdof_plants() -> serde_json::Value {
    serde_json::json!({
        "sdof": { "type": "sdof", "max_input": 3.0 }
    })
}

#[test]
fn simulate_decays_and_reruns_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": sdof_plants(),
            "plant": "sdof",
            "initial": { "kind": "state", "values": [0.1, 0.0] },
            "input": { "kind": "constant", "value": 0.0, "duration": 50.0, "dt": 0.01 },
            "dt_integration": 1e-3,
            "output_dir": "out"
        }),
    );
    run_ok(&["simulate", "--config", config.to_str().unwrap()]);
    let csv_path = dir.path().join("out/trajectory.csv");
    let first = std::fs::read(&csv_path).unwrap();
    assert!(dir.path().join("out/trajectory.svg").exists());

    // final observable has decayed
    let text = String::from_utf8(first.clone()).unwrap();
    let last = text.lines().last().unwrap();
    let obs: f64 = last.split(',').last().unwrap().parse().unwrap();
    assert!(obs.abs() < 1e-4, "final observable {obs}");

    // rerun: byte-identical
    run_ok(&["simulate", "--config", config.to_str().unwrap()]);
    let second = std::fs::read(&csv_path).unwrap();
    assert_eq!(first, second);
}

#[test]
fn missing_key_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": sdof_plants(),
            "plant": "sdof",
            // no `input`
            "initial": { "kind": "state", "values": [0.0, 0.0] },
            "dt_integration": 1e-3,
            "output_dir": "out"
        }),
    );
    let out = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists(), "no outputs on config error");
}

#[test]
fn unknown_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": sdof_plants(),
            "plant": "sdof",
            "initial": { "kind": "state", "values": [0.0, 0.0] },
            "input": { "kind": "constant", "value": 0.0, "duration": 1.0, "dt": 0.01 },
            "dt_integration": 1e-3,
            "output_dir": "out",
            "typo_key": 1
        }),
    );
    let out = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("typo_key"), "{stderr}");
}

#[test]
fn simulation_fault_exits_3() {
    // drive the pouch actuator into the stiffness guard with a too-coarse step
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": { "hasel": { "type": "hasel" } },
            "plant": "hasel",
            "initial": { "kind": "steady", "input": 0.0 },
            "input": { "kind": "constant", "value": 3000.0, "duration": 0.3, "dt": 0.01 },
            "dt_integration": 1e-3,
            "output_dir": "out"
        }),
    );
    let out = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn identify_sm_recovers_linear_map_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": {
                "bench": {
                    "type": "static_poly",
                    "params": { "coefficients": [1.12e-7, 1.56e-3] }
                }
            },
            "plant": "bench",
            "sample_dt": 0.01,
            "dt_integration": 0.01,
            "decay": { "kind": "linear", "lambda": -5.0 },
            "sm": {
                "order": 1,
                "seeds": [5],
                "duration": 60.0,
                "range": [0.0, 8000.0],
                "target_rho": 0.2
            },
            "output_dir": "out"
        }),
    );
    run_ok(&["identify", "--kind", "sm", "--config", config.to_str().unwrap()]);

    let model_text = std::fs::read_to_string(dir.path().join("out/sm_model.json")).unwrap();
    let model = ssmred_core::reduction::sm_from_json::<f64>(&model_text).unwrap();
    let coeffs = model.forward().to_univariate();
    assert!(((coeffs[0] - 1.12e-7) / 1.12e-7).abs() < 5e-7, "S0 {}", coeffs[0]);
    assert!(((coeffs[1] - 1.56e-3) / 1.56e-3).abs() < 5e-7, "S1 {}", coeffs[1]);
    // loaded model predicts the source map inside its calibrated range
    let (lo, hi) = model.input_range();
    for frac in [0.05, 0.5, 0.95] {
        let u = lo + (hi - lo) * frac;
        let input = ssmred_core::signals::TimeSeries::scalar(0.0, 1.0, vec![u, u]).unwrap();
        let (pred, _) = model.predict(&input).unwrap();
        let expected = 1.12e-7 + 1.56e-3 * u;
        assert!((pred.value(0) - expected).abs() < 1e-9 * expected);
    }
    assert!(dir.path().join("out/sm_fit_report.json").exists());
}

fn sdof_assm_section(grid: &[f64]) -> serde_json::Value {
    serde_json::json!({
        "grid": grid,
        "jump_offsets": [-6, -3, -1, 1, 3, 6],
        "decay_duration": 1.8,
        "embedding": { "window": 5, "delay": 30, "reduced_dim": 2 },
        "transient_trim": 0.2
    })
}

#[test]
fn identify_assm_writes_sorted_locals() {
    let dir = tempfile::tempdir().unwrap();
    let grid: Vec<f64> = (0..7).map(|i| i as f64 * 1.0 / 3.0).collect();
    let config = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": sdof_plants(),
            "plant": "sdof",
            "sample_dt": 1e-3,
            "dt_integration": 1e-4,
            "assm": sdof_assm_section(&grid),
            "output_dir": "out"
        }),
    );
    run_ok(&["identify", "--kind", "assm", "--config", config.to_str().unwrap()]);
    let text = std::fs::read_to_string(dir.path().join("out/assm_model.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let locals = value["model"]["locals"].as_array().unwrap();
    assert_eq!(locals.len(), 7);
    let levels: Vec<f64> = locals
        .iter()
        .map(|l| l["input_level"].as_f64().unwrap())
        .collect();
    assert!(levels.windows(2).all(|w| w[1] > w[0]), "unsorted {levels:?}");
}

#[test]
fn rho_sweep_emits_table_and_overlays() {
    let dir = tempfile::tempdir().unwrap();
    // train both models first
    let grid: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
    let identify_cfg = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": sdof_plants(),
            "plant": "sdof",
            "sample_dt": 1e-3,
            "dt_integration": 1e-4,
            "decay": { "kind": "jump_release", "u_from": 1.5, "u_to": 0.0,
                        "duration": 2.0, "dt": 1e-3, "dt_integration": 1e-4 },
            "sm": { "order": 3, "seeds": [101], "duration": 60.0,
                    "range": [0.0, 2.0], "target_rho": 0.05 },
            "assm": sdof_assm_section(&grid),
            "output_dir": "models"
        }),
    );
    run_ok(&["identify", "--kind", "sm", "--config", identify_cfg.to_str().unwrap()]);
    run_ok(&["identify", "--kind", "assm", "--config", identify_cfg.to_str().unwrap()]);

    let sweep_cfg = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": sdof_plants(),
            "plant": "sdof",
            "decay": { "kind": "jump_release", "u_from": 1.5, "u_to": 0.0,
                        "duration": 2.0, "dt": 1e-3, "dt_integration": 1e-4 },
            "rho_targets": [0.15, 0.6],
            "seed_base": 7,
            "duration": 30.0,
            "sample_dt": 1e-3,
            "dt_integration": 1e-3,
            "range": [0.0, 2.0],
            "sm_model": "models/sm_model.json",
            "assm_model": "models/assm_model.json",
            "output_dir": "sweep"
        }),
    );
    run_ok(&["rho-sweep", "--config", sweep_cfg.to_str().unwrap()]);
    let table = std::fs::read_to_string(dir.path().join("sweep/nmte_table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "rho_target,rho_achieved,nmte_sm,nmte_assm");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        for field in line.split(',') {
            let v: f64 = field.parse().unwrap();
            assert!(v.is_finite());
        }
    }
    assert!(dir.path().join("sweep/overlay_rho_0.svg").exists());
    assert!(dir.path().join("sweep/overlay_rho_1.svg").exists());

    // empty target list is a config error
    let empty_cfg = write_config(
        &dir.path().join("."),
        &serde_json::json!({
            "plants": sdof_plants(),
            "plant": "sdof",
            "decay": { "kind": "linear", "lambda": -5.0 },
            "rho_targets": [],
            "duration": 10.0,
            "sample_dt": 1e-3,
            "dt_integration": 1e-3,
            "range": [0.0, 2.0],
            "sm_model": "models/sm_model.json",
            "assm_model": "models/assm_model.json",
            "output_dir": "sweep2"
        }),
    );
    let out = bin()
        .args(["rho-sweep", "--config", empty_cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn control_bench_reports_match_logs() {
    let dir = tempfile::tempdir().unwrap();
    let plants = serde_json::json!({
        "joint": { "type": "joint", "max_input": 3.0 }
    });
    // train the joint map from forced data
    let identify_cfg = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": plants,
            "plant": "joint",
            "sample_dt": 1e-3,
            "dt_integration": 1e-3,
            "decay": { "kind": "jump_release", "u_from": 2.0, "u_to": 0.0,
                        "duration": 3.0, "dt": 1e-3, "dt_integration": 1e-3 },
            "sm": { "order": 5, "seeds": [11, 12], "duration": 40.0,
                    "range": [-3.0, 3.0], "target_rho": 0.05 },
            "output_dir": "models"
        }),
    );
    run_ok(&["identify", "--kind", "sm", "--config", identify_cfg.to_str().unwrap()]);

    let bench_cfg = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": plants,
            "plant": "joint",
            "sm_model": "models/sm_model.json",
            "decay": { "kind": "jump_release", "u_from": 2.0, "u_to": 0.0,
                        "duration": 3.0, "dt": 1e-3, "dt_integration": 1e-3 },
            "reference": { "seed": 42, "duration": 10.0, "amplitude_deg": 45.0,
                            "target_rho": 0.12, "ramp_in": 2.0 },
            "calibration": { "seed": 43, "duration": 6.0, "amplitude_deg": 45.0,
                              "target_rho": 0.12, "ramp_in": 2.0 },
            "pi": { "period": 1e-3 },
            "gains_ff_fb": { "kp": 3.7, "ki": 8.9 },
            "gains_fb_only": { "kp": 8.9, "ki": 8.9 },
            "limits": { "v_min": 0.0, "v_max": 3.0, "dv_max": 0.005 },
            "seed": 42,
            "output_dir": "bench"
        }),
    );
    run_ok(&["control-bench", "--config", bench_cfg.to_str().unwrap()]);

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("bench/benchmark_report.json")).unwrap(),
    )
    .unwrap();
    for mode in ["ff_fb", "ff_only", "fb_only"] {
        let log_text =
            std::fs::read_to_string(dir.path().join(format!("bench/log_{mode}.csv"))).unwrap();
        let mut lines = log_text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let e_col = header.iter().position(|&h| h == "e").unwrap();
        let mut sum_sq = 0.0f64;
        let mut n = 0usize;
        for line in lines {
            let e: f64 = line.split(',').nth(e_col).unwrap().parse().unwrap();
            sum_sq += e * e;
            n += 1;
        }
        let rms_deg = (sum_sq / n as f64).sqrt() * 180.0 / std::f64::consts::PI;
        let reported = report["modes"][mode]["rms_error_deg"].as_f64().unwrap();
        assert!(
            (rms_deg - reported).abs() < 1e-12 * rms_deg.max(1.0),
            "{mode}: {rms_deg} vs {reported}"
        );
    }
    assert!(dir.path().join("bench/overlay.svg").exists());

    // nonexistent model path is a config error
    let bad_cfg = write_config(
        &dir.path().join("."),
        &serde_json::json!({
            "plants": plants,
            "plant": "joint",
            "sm_model": "models/missing.json",
            "decay": { "kind": "linear", "lambda": -3.0 },
            "reference": { "seed": 42, "duration": 5.0, "amplitude_deg": 45.0, "target_rho": 0.12 },
            "calibration": { "seed": 43, "duration": 5.0, "amplitude_deg": 45.0, "target_rho": 0.12 },
            "pi": { "period": 1e-3 },
            "gains_ff_fb": { "kp": 1.0, "ki": 1.0 },
            "gains_fb_only": { "kp": 1.0, "ki": 1.0 },
            "limits": { "v_min": 0.0, "v_max": 3.0, "dv_max": 0.005 },
            "seed": 42,
            "output_dir": "bench2"
        }),
    );
    let out = bin()
        .args(["control-bench", "--config", bad_cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_cap_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &serde_json::json!({
            "plants": sdof_plants(),
            "plant": "sdof",
            "decay": { "kind": "linear", "lambda": -5.0 },
            "rho_targets": [0.5],
            "duration": 5.0,
            "sample_dt": 1e-3,
            "dt_integration": 1e-3,
            "range": [0.0, 2.0],
            "sm_model": "missing.json",
            "assm_model": "missing.json",
            "output_dir": "out"
        }),
    );
    let out = bin()
        .args(["rho-sweep", "--config", config.to_str().unwrap()])
        .env("SSMRED_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("SSMRED_THREADS"), "{stderr}");
}
