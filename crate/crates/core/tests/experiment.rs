use quasitriple::experiment::{parse_config, run, run_file, Overrides, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK};
use quasitriple::Error;
use serde_json::Value;

fn run_text(text: &str) -> quasitriple::experiment::Outputs {
    run(&parse_config(text).unwrap()).unwrap()
}

fn json(files: &quasitriple::experiment::Outputs, name: &str) -> Value {
    serde_json::from_str(&files[name]).unwrap()
}

#[test]
fn green_check_on_square() {
    let files = run_text(
        r#"{"experiment":"green-check","model":"discrete",
            "grid":{"shape":"rectangle","extents":[1.0,1.0],"h":0.1},
            "coeff":{"a11":2.0,"a22":1.0,"a12":0.5,"a":0.3}}"#,
    );
    let v = json(&files, "report.json");
    let id = &v["identities"];
    assert!(id["green_max_scaled"].as_f64().unwrap() <= 1e-10);
    assert!(id["green_max_residual"].as_f64().unwrap() <= 1e-10);
    assert!(id["adjoint_max_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(id["monotone"], Value::Bool(true));
    assert_eq!(id["positive"], Value::Bool(true));
    assert_eq!(v["run"]["experiment"], "triple-check");
}

#[test]
fn decay_fit_on_halfline() {
    let files = run_text(r#"{"experiment":"decay-fit","model":"halfline","samples":20}"#);
    let csv = &files["samples.csv"];
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "lambda,norm_M,bound_value,satisfied");
    assert_eq!(lines.count(), 20);
    let env = &json(&files, "envelope.json")["envelope"];
    assert!((env["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    assert!((env["c"].as_f64().unwrap() - 1.0).abs() < 1e-2);
    assert_eq!(env["all_satisfied"], Value::Bool(true));
}

#[test]
fn krein_and_hypotheses_on_random_model() {
    let base = r#""model":"random","random":{"interior":20,"boundary":4},"seed":3,
        "B":{"kind":"nonlocal","matrix":[[0.5,0.1,0,0],[0.1,-0.3,0,0],[0,0,0.2,0],[0,0,0,-1]]}"#;
    let files = run_text(&format!(
        r#"{{"experiment":"krein-check",{base},"lambdas":[{{"re":0.5,"im":1.0}},-3.0]}}"#
    ));
    assert!(json(&files, "report.json")["max_relative_deviation"].as_f64().unwrap() <= 1e-8);
    let files = run_text(&format!(r#"{{"experiment":"hypotheses",{base}}}"#));
    let report = &json(&files, "hypotheses.json")["report"];
    assert!(report["entries"].as_array().unwrap().len() >= 2);
}

#[test]
fn bound_certify_halfline_is_valid() {
    let files = run_text(r#"{"experiment":"bound-certify","model":"halfline","B":{"kind":"scalar","value":2.0}}"#);
    let v = json(&files, "certificates.json");
    let certs = v["certificates"].as_array().unwrap();
    assert!(certs.iter().all(|c| c["valid"] == Value::Bool(true)));
    let value = certs[0]["certificate"]["value"].as_f64().unwrap();
    assert!((value + 4.0).abs() < 1e-6, "{value}");
}

#[test]
fn bound_certify_negative_parameter() {
    let files = run_text(
        r#"{"experiment":"bound-certify","model":"discrete",
            "grid":{"shape":"interval","extents":[1.0],"h":0.05},"B":{"kind":"scalar","value":-1.0}}"#,
    );
    let v = json(&files, "certificates.json");
    assert_eq!(v["certificates"][0]["certificate"]["route"], "negativity");
}

#[test]
fn runs_are_deterministic_across_job_counts() {
    let cfg = |jobs: usize| {
        format!(
            r#"{{"experiment":"sweep","model":"discrete","jobs":{jobs},
                "grid":{{"shape":"rectangle","extents":[1.0,1.0],"h":0.05}},
                "B":{{"kind":"local","b":{{"base":1.0,"amp":0.5,"kx":3.0}}}},
                "omegas":[0,0.5,1,2,4],"mu":-1.0,"fit_window":{{"lo":-40,"hi":-1.01}},"samples":24}}"#
        )
    };
    let one = run_text(&cfg(1));
    let eight = run_text(&cfg(8));
    assert_eq!(one["sweep.csv"], eight["sweep.csv"]);
    assert_eq!(one, run_text(&cfg(1)));
}

#[test]
fn saturated_window_is_refused_with_crossover() {
    let cfg = parse_config(
        r#"{"experiment":"decay-fit","model":"discrete",
            "grid":{"shape":"rectangle","extents":[1.0,1.0],"h":0.05},"fit_window":{"lo":-1000,"hi":-10}}"#,
    )
    .unwrap();
    match run(&cfg) {
        Err(Error::ConfigInvalid { pointer, message }) => {
            assert_eq!(pointer, "/fit_window");
            assert!(message.contains("-4.000e2"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn exit_codes_and_error_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"experiment":"sweep","model":"discrete","grid":{"shape":"interval","extents":[1.0],"h":-0.1},"omegas":[1]}"#).unwrap();
    let out = dir.path().join("bad_out");
    let o = run_file(&bad, &Overrides { out: Some(out.clone()), ..Overrides::default() });
    assert_eq!(o.exit_code, EXIT_CONFIG);
    let err: Value = serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(err["pointer"], "/grid/h");
    assert_eq!(err["kind"], "ConfigInvalid");

    // λ = 0 lies on the spectrum of the free half-line
    let singular = dir.path().join("singular.json");
    std::fs::write(&singular, r#"{"experiment":"krein-check","model":"halfline","lambdas":[0.0]}"#).unwrap();
    let out = dir.path().join("singular_out");
    let o = run_file(&singular, &Overrides { out: Some(out.clone()), ..Overrides::default() });
    assert_eq!(o.exit_code, EXIT_NUMERIC, "{:?}", o.error);
    assert!(out.join("error.json").exists());

    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"experiment":"triple-check","model":"halfline"}"#).unwrap();
    let out = dir.path().join("good_out");
    let o = run_file(&good, &Overrides { out: Some(out.clone()), jobs: Some(2), ..Overrides::default() });
    assert_eq!(o.exit_code, EXIT_OK);
    assert!(out.join("report.json").exists());

    let missing = run_file(&dir.path().join("nope.json"), &Overrides { out: Some(dir.path().join("m")), ..Overrides::default() });
    assert_eq!(missing.exit_code, EXIT_CONFIG);
}
