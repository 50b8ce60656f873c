use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stressuq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stressuq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = stressuq(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

/// Column `name` of a CSV file as numbers.
fn column(p: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(p).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].parse().unwrap())
        .collect()
}

/// Stand-in reference data plus a config pointing at it.
fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["synth-dns", "--out", data.to_str().unwrap()]);
    std::fs::write(dir.path().join("run.toml"), "[data]\ndir = \"data\"\n").unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn baseline_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    ok(&["baseline", "--re-tau", "180", "--out", s(&a)]);
    let first = read(&a.join("baseline.csv"));
    assert_eq!(first.lines().count(), 193);
    assert!(first.starts_with("y_plus,U_plus,"));
    let m1 = read(&a.join("manifest.json"));
    ok(&["baseline", "--re-tau", "180", "--out", s(&a)]);
    assert_eq!(read(&a.join("baseline.csv")), first);
    assert_eq!(read(&a.join("manifest.json")), m1);
    let m = manifest(&a);
    assert!(m["results"]["max_abs_lambda2"].as_f64().unwrap() < 1e-10);
}

#[test]
fn zero_reynolds_number_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = stressuq(&["baseline", "--re-tau", "0", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("re_tau"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 3\n[solver]\nre_tau = 550.0\nn_cells = 96\n").unwrap();
    let out = dir.path().join("o");
    ok(&[
        "baseline",
        "--config",
        s(&cfg),
        "--re-tau",
        "180",
        "--out",
        s(&out),
    ]);
    let m = manifest(&out);
    assert_eq!(m["config"]["solver"]["re_tau"], 180.0);
    assert_eq!(m["config"]["solver"]["n_cells"], 96);
    assert_eq!(m["seed"], 3);
    assert_eq!(read(&out.join("baseline.csv")).lines().count(), 97);
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[solver]\nre_tua = 550.0\n").unwrap();
    let out = stressuq(&["baseline", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_needs_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = stressuq(&["report", s(dir.path())]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!dir.path().join("summary.csv").exists());
}

#[test]
fn report_of_a_fresh_baseline_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    ok(&["baseline", "--re-tau", "180", "--out", s(&run)]);
    let before = read(&run.join("manifest.json"));
    ok(&["report", s(&run)]);
    let summary = read(&run.join("summary.csv"));
    assert_eq!(summary.lines().count(), 2, "{summary}");
    assert!(summary.lines().nth(1).unwrap().starts_with(".,baseline,"));
    // The run's own manifest is left alone.
    assert_eq!(read(&run.join("manifest.json")), before);
}

#[test]
fn missing_training_data_names_the_reynolds_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let out = stressuq(&["train", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    for re in ["180", "550", "2000", "5200", "1000"] {
        assert!(err.contains(re), "{err}");
    }
    assert!(manifest(dir.path())["error"].is_string());
}

#[test]
fn data_driven_mode_needs_a_forest() {
    let dir = tempfile::tempdir().unwrap();
    let out = stressuq(&["uq", "--mode", "pcorr", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn training_envelopes_and_report() {
    let ws = workspace();
    let root = ws.path();
    let cfg = root.join("run.toml");
    let runs = root.join("runs");

    let t1 = runs.join("train_p");
    ok(&[
        "train",
        "--config",
        s(&cfg),
        "--target",
        "p",
        "--out",
        s(&t1),
    ]);
    let m = manifest(&t1);
    let hp = &m["results"]["hyperparams"];
    assert_eq!(
        [
            &hp["max_depth"],
            &hp["min_samples_split"],
            &hp["max_features"],
            &hp["n_trees"]
        ],
        [6, 6, 3, 30]
    );
    let test_mse = m["results"]["test_mse"].as_f64().unwrap();
    let mean_mse = m["results"]["test_mean_predictor_mse"].as_f64().unwrap();
    assert!(test_mse.is_finite() && test_mse < mean_mse);

    let t2 = root.join("again");
    ok(&[
        "train",
        "--config",
        s(&cfg),
        "--target",
        "p",
        "--out",
        s(&t2),
    ]);
    assert_eq!(
        read(&t1.join("forest_p.json")),
        read(&t2.join("forest_p.json"))
    );

    let free = runs.join("uq_free");
    ok(&[
        "uq",
        "--config",
        s(&cfg),
        "--mode",
        "data-free",
        "--out",
        s(&free),
    ]);
    for label in ["1C", "2C", "3C"] {
        assert!(free.join(format!("solution_{label}.csv")).is_file());
        assert!(free.join(format!("trace_{label}.csv")).is_file());
    }
    assert_eq!(manifest(&free)["results"]["realizability_violations"], 0);

    let forest = t1.join("forest_p.json");
    let driven = runs.join("uq_p");
    ok(&[
        "uq",
        "--config",
        s(&cfg),
        "--mode",
        "p",
        "--forest",
        s(&forest),
        "--out",
        s(&driven),
    ]);

    let report = root.join("report");
    ok(&["report", s(&runs), "--out", s(&report)]);
    let mut r = csv::Reader::from_path(report.join("summary.csv")).unwrap();
    let h = r.headers().unwrap().clone();
    let col = |n: &str| h.iter().position(|x| x == n).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let p_row = rows.iter().find(|x| &x[col("run")] == "uq_p").unwrap();
    let w: f64 = p_row[col("width_ratio")].parse().unwrap();
    assert!(w > 1.0, "width ratio {w}");
}

#[test]
fn zero_delta_b_collapses_the_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    std::fs::write(&cfg, "[solver]\nresidual_tol = 1e-12\n").unwrap();
    let out = dir.path().join("o");
    ok(&[
        "uq",
        "--config",
        s(&cfg),
        "--re-tau",
        "180",
        "--delta-b",
        "0",
        "--out",
        s(&out),
    ]);
    let width = column(&out.join("envelope.csv"), "width");
    assert_eq!(width.len(), 192);
    // the members restart from the baseline and only move by the tolerance
    assert!(width.iter().all(|w| *w < 1e-9), "{width:?}");
}

#[test]
fn reference_propagation_matches_and_is_seeded() {
    let ws = workspace();
    let cfg = ws.path().join("run.toml");
    let clean = ws.path().join("clean");
    ok(&[
        "propagate-dns",
        "--config",
        s(&cfg),
        "--noise",
        "0",
        "--out",
        s(&clean),
    ]);
    let l2 = manifest(&clean)["results"]["l2_error"].as_f64().unwrap();
    assert!(l2 < 0.01, "{l2}");

    let a = ws.path().join("a");
    let b = ws.path().join("b");
    for out in [&a, &b] {
        ok(&[
            "propagate-dns",
            "--config",
            s(&cfg),
            "--noise",
            "0.05",
            "--seed",
            "7",
            "--out",
            s(out),
        ]);
    }
    assert_eq!(read(&a.join("metrics.csv")), read(&b.join("metrics.csv")));
}
