use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn persist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_persist"))
        .args(args)
        .output()
        .expect("persist runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

const GRID: &str = r#"{
    "experiment": "persistence_grid",
    "generator": {"process": "walk", "walk": {"dimension": 1, "kind": "simple"}},
    "grid": [256, 512, 1024, 2048, 4096],
    "trials": 10000,
    "seed": 11
}"#;

#[test]
fn persistence_grid_writes_csv_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), GRID);
    let out = tmp.path().join("out");
    let res = persist(&["run", "--config", &config, "--out", out.to_str().unwrap(), "--plot"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,level,trials,p_hat,ci_low,ci_high"));
    assert_eq!(lines.count(), 5);

    let s = summary(&out);
    let theta = s["theta_hat"].as_f64().unwrap();
    assert!((0.3..0.7).contains(&theta), "theta_hat = {theta}");
    assert_eq!(s["seed"], 11);
    assert_eq!(s["experiment"], "persistence_grid");
    assert!(s["toolkit_version"].is_string());
    assert!(std::fs::read_to_string(out.join("plot.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), GRID);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(persist(&["run", "--config", &config, "--workers", "1", "--out", a.to_str().unwrap()])
        .status
        .success());
    assert!(persist(&["run", "--config", &config, "--workers", "3", "--out", b.to_str().unwrap()])
        .status
        .success());
    for name in ["results.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn exact_identities_on_lazy_rademacher_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{
            "experiment": "identities",
            "generator": {"process": "rwrs",
                          "walk": {"dimension": 1, "kind": "simple"},
                          "scenery": {"law": "lazy_rademacher", "q": 0.5}},
            "grid": [5],
            "seed": 1
        }"#,
    );
    let out = tmp.path().join("out");
    let res = persist(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let s = summary(&out);
    assert_eq!(s["identities"]["all_pass"], true);
    let checks = s["identities"]["report"]["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["status"] == "PASS"), "{checks:?}");
}

#[test]
fn brute_force_simple_walk() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{
            "experiment": "brute_force",
            "generator": {"process": "walk", "walk": {"dimension": 1, "kind": "simple"}},
            "grid": [2, 4],
            "seed": 1
        }"#,
    );
    let out = tmp.path().join("out");
    assert!(persist(&["run", "--config", &config, "--out", out.to_str().unwrap()])
        .status
        .success());
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(
        csv,
        "n,level,probability,p,enumerated_states\n2,-1,1/4,0.25,4\n4,-1,3/16,0.1875,16\n"
    );
}

#[test]
fn invalid_mdm_parameter_exits_one_and_names_field() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{"experiment": "persistence_grid", "generator": {"process": "mdm", "p": 1.5},
            "grid": [16, 32, 64, 128, 256], "trials": 1000, "seed": 1}"#,
    );
    let out = tmp.path().join("out");
    let res = persist(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("generator.p"), "{err}");
    assert!(!out.join("summary.json").exists());

    let res = persist(&["validate-config", "--config", &config]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn malformed_config_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "{\n  \"experiment\": \"mean_max\",\n  \"bogus\": 1\n}");
    let res = persist(&["validate-config", "--config", &config]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));
}

#[test]
fn validate_config_accepts_good_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), GRID);
    let res = persist(&["validate-config", "--config", &config]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).contains("ok"));
}

#[test]
fn published_schema_lists_every_config_field() {
    let schema: Value =
        serde_json::from_str(include_str!("../config.schema.json")).expect("schema is valid JSON");
    let mut documented: Vec<&str> = schema["properties"]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    let config = persist_cli::ExperimentConfig::from_json(GRID).unwrap();
    let serialized: Value = serde_json::from_str(&config.to_json()).unwrap();
    let mut actual: Vec<&str> = serialized.as_object().unwrap().keys().map(String::as_str).collect();
    documented.sort_unstable();
    actual.sort_unstable();
    assert_eq!(documented, actual);
}
