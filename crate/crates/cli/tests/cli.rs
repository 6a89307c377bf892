//! End-to-end checks of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::Command;

fn dnt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dnt"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dnt-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("spawn dnt");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn strip_wall(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let mut parts: Vec<&str> = line.split(',').collect();
            parts.pop();
            parts.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn gen_fit_roundtrip_produces_estimates_and_diagnostics() {
    let dir = workdir("genfit");
    let data = dir.join("b.dnt");
    let truth = dir.join("lam.dnt");
    let out = dir.join("fit.dnt");
    run_ok(dnt().args([
        "gen-data",
        "--n", "12", "--l", "4", "--m", "2",
        "--levels", "0.8,0.2,0.75",
        "--seed", "5",
        "--out", data.to_str().unwrap(),
        "--truth-out", truth.to_str().unwrap(),
    ]));
    assert!(data.exists() && truth.exists());
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("b.dnt.json")).unwrap()).unwrap();
    assert_eq!(sidecar["kind"], "bits");
    assert_eq!(sidecar["n"], 12);

    let stdout = run_ok(dnt().args([
        "fit",
        "--input", data.to_str().unwrap(),
        "--m-max", "2",
        "--search", "heuristic",
        "--restarts", "2",
        "--seed", "1",
        "--out", out.to_str().unwrap(),
    ]));
    assert!(stdout.contains("m_hat="));
    assert!(out.exists());
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("fit.dnt.diag.json")).unwrap()).unwrap();
    assert!(diag["objective"].as_f64().unwrap().is_finite());
    assert!(diag["support_size"].as_u64().unwrap() >= 1);
}

#[test]
fn sparse_flags_are_accepted() {
    let dir = workdir("sparse");
    let data = dir.join("b.dnt");
    run_ok(dnt().args([
        "gen-data", "--n", "10", "--l", "2", "--m", "1", "--levels", "0.3",
        "--seed", "2", "--out", data.to_str().unwrap(),
    ]));
    run_ok(dnt().args([
        "fit",
        "--input", data.to_str().unwrap(),
        "--m-max", "2",
        "--family", "balanced",
        "--sparse-rho", "0.5",
        "--lambda0", "1.0",
        "--seed", "3",
        "--out", dir.join("fit.dnt").to_str().unwrap(),
    ]));
}

#[test]
fn graphon_generation_and_fit() {
    let dir = workdir("graphon");
    let spec = dir.join("spec.json");
    std::fs::write(
        &spec,
        serde_json::json!({
            "PiecewiseConstant": {
                "breakpoints": [0.0, 0.5, 1.0],
                "levels": [[0.8, 0.2], [0.2, 0.7]],
            }
        })
        .to_string(),
    )
    .unwrap();
    let data = dir.join("b.dnt");
    run_ok(dnt().args([
        "gen-graphon",
        "--spec", spec.to_str().unwrap(),
        "--n", "12", "--l", "4",
        "--zeta", "grid",
        "--seed", "4",
        "--out", data.to_str().unwrap(),
        "--zeta-out", dir.join("zeta.json").to_str().unwrap(),
    ]));
    let zeta: Vec<f64> =
        serde_json::from_str(&std::fs::read_to_string(dir.join("zeta.json")).unwrap()).unwrap();
    assert_eq!(zeta.len(), 12);
    let stdout = run_ok(dnt().args([
        "fit-graphon",
        "--input", data.to_str().unwrap(),
        "--m-max", "2",
        "--restarts", "2",
        "--seed", "5",
        "--out", dir.join("fit.dnt").to_str().unwrap(),
    ]));
    assert!(stdout.contains("l1_hat="));
}

#[test]
fn oracle_runs_on_tiny_inputs_and_refuses_large_ones() {
    let dir = workdir("oracle");
    let tiny = dir.join("tiny.dnt");
    run_ok(dnt().args([
        "gen-data", "--n", "4", "--l", "2", "--m", "2", "--levels", "0.8,0.2,0.7",
        "--seed", "6", "--out", tiny.to_str().unwrap(),
    ]));
    run_ok(dnt().args([
        "oracle",
        "--input", tiny.to_str().unwrap(),
        "--m-max", "2",
        "--out", dir.join("oracle.dnt").to_str().unwrap(),
    ]));
    let big = dir.join("big.dnt");
    run_ok(dnt().args([
        "gen-data", "--n", "16", "--l", "2", "--m", "2", "--levels", "0.8,0.2,0.7",
        "--seed", "7", "--out", big.to_str().unwrap(),
    ]));
    let out = dnt()
        .args([
            "oracle",
            "--input", big.to_str().unwrap(),
            "--m-max", "2",
            "--out", dir.join("nope.dnt").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("states"), "stderr: {err}");
}

fn experiment_config(path: &Path) {
    std::fs::write(
        path,
        serde_json::json!({
            "schema_version": 1,
            "n": 10,
            "horizon": 2,
            "generator": {"Dsbm": {"m_star": 2, "levels": [0.8, 0.2, 0.75], "wiggle": 0.0}},
            "estimator": {"m_max": 2, "search": {"Heuristic": {"restarts": 2}}},
            "replicates": 4,
            "master_seed": 11,
            "t_values": [3.0]
        })
        .to_string(),
    )
    .unwrap();
}

#[test]
fn experiment_outputs_are_deterministic() {
    let dir = workdir("experiment");
    let config = dir.join("config.json");
    experiment_config(&config);
    run_ok(dnt().args([
        "experiment",
        "--config", config.to_str().unwrap(),
        "--out-dir", dir.join("run1").to_str().unwrap(),
    ]));
    run_ok(dnt().args([
        "experiment",
        "--config", config.to_str().unwrap(),
        "--out-dir", dir.join("run2").to_str().unwrap(),
    ]));
    let a = std::fs::read_to_string(dir.join("run1/results.csv")).unwrap();
    let b = std::fs::read_to_string(dir.join("run2/results.csv")).unwrap();
    assert_eq!(strip_wall(&a), strip_wall(&b));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("run1/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary"]["replicates_ok"], 4);
}

#[test]
fn experiment_sweep_writes_a_slope_report() {
    let dir = workdir("sweep");
    let config = dir.join("config.json");
    experiment_config(&config);
    run_ok(dnt().args([
        "experiment",
        "--config", config.to_str().unwrap(),
        "--out-dir", dir.join("out").to_str().unwrap(),
        "--sweep-n", "8,12,16",
    ]));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/sweep.json")).unwrap()).unwrap();
    assert!(report["slope"].as_f64().unwrap().is_finite());
    assert_eq!(report["points"].as_array().unwrap().len(), 3);
}

#[test]
fn check_basis_reports_all_conditions() {
    let stdout = run_ok(dnt().args(["check-basis", "--basis", "dct", "--l", "8"]));
    assert!(stdout.contains("orthogonal: true"));
    assert!(stdout.contains("flat first row"));
    assert!(stdout.contains("entry bound"));
    assert!(stdout.contains("binary sup bound (exhaustive"));
    let haar = run_ok(dnt().args(["check-basis", "--basis", "haar", "--l", "4"]));
    assert!(haar.contains("entry bound") && haar.contains("false"));
}

#[test]
fn custom_basis_file_round_trips_through_fit() {
    let dir = workdir("basisfile");
    // store the default length-4 basis and feed it back as a file
    let basis = dnt_core::TemporalBasis::dct(4);
    let basis_path = dir.join("h.dnt");
    dnt_core::io::write_matrix(basis.matrix(), &basis_path, "temporal_basis").unwrap();
    let data = dir.join("b.dnt");
    run_ok(dnt().args([
        "gen-data", "--n", "8", "--l", "4", "--m", "1", "--levels", "0.4",
        "--seed", "8", "--out", data.to_str().unwrap(),
    ]));
    let stdout = run_ok(dnt().args([
        "fit",
        "--input", data.to_str().unwrap(),
        "--basis", "file",
        "--basis-file", basis_path.to_str().unwrap(),
        "--m-max", "1",
        "--out", dir.join("fit.dnt").to_str().unwrap(),
    ]));
    assert!(stdout.contains("m_hat=1"));
}
