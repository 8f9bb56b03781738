use std::path::Path;
use std::process::Command;

fn quasitriple(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_quasitriple")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SWEEP: &str = r#"{"experiment":"sweep","model":"discrete",
    "grid":{"shape":"rectangle","extents":[1.0,0.5],"h":0.05},
    "coeff":{"a11":{"base":1.0,"amp":0.3,"kx":2.0},"a22":1.2},
    "B":{"kind":"scalar","value":1.0},
    "omegas":[0,1,2,4,8],"mu":-1.0,"fit_window":{"lo":-39,"hi":-1.01},"samples":16}"#;

#[test]
fn sweep_output_is_identical_for_one_and_eight_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(quasitriple(&["sweep", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1"]).status.success());
    assert!(quasitriple(&["sweep", &cfg, "--out", b.to_str().unwrap(), "--jobs", "8"]).status.success());
    let csv_a = std::fs::read(a.join("sweep.csv")).unwrap();
    let csv_b = std::fs::read(b.join("sweep.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    assert_eq!(std::fs::read(a.join("sweep.json")).unwrap(), std::fs::read(b.join("sweep.json")).unwrap());
}

#[test]
fn negative_spacing_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"experiment":"triple-check","model":"discrete","grid":{"shape":"rectangle","extents":[1.0,1.0],"h":-0.1}}"#,
    );
    let out = dir.path().join("out");
    let o = quasitriple(&["triple-check", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/grid/h"));
    let err: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(err["pointer"], "/grid/h");
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", r#"{"experiment":"krein-check","model":"halfline","lambdas":[0.0]}"#);
    let out = dir.path().join("out");
    let o = quasitriple(&["krein-check", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(out.join("error.json").exists());
}

#[test]
fn subcommand_overrides_config_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.json", r#"{"experiment":"triple-check","model":"halfline"}"#);
    let out = dir.path().join("out");
    let o = quasitriple(&["decay-fit", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("samples.csv").exists());
    assert!(out.join("envelope.json").exists());

    let out = dir.path().join("green");
    let o = quasitriple(&["green-check", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out.join("report.json").exists());
}

#[test]
fn zero_jobs_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.json", r#"{"experiment":"triple-check","model":"halfline"}"#);
    let out = dir.path().join("out");
    let o = quasitriple(&["run", &cfg, "--out", out.to_str().unwrap(), "--jobs", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
