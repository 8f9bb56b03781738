//! Config-driven experiments: JSON config in, CSV/JSON report files out.
//!
//! Exit codes: 0 success, 2 invalid config (with a JSON pointer to the
//! offending field), 3 numerical failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{
    decay_fit, form_lower_bound, geometric_window, lower_bound_decay, negative_b_guarantee, sample_weyl_norms,
    BoundCertificate, DecayEnvelope,
};
use crate::error::{Error, Result};
use crate::krein::{check_selfadjoint_hypotheses, default_hypothesis_lambdas};
use crate::linalg::C;
use crate::models::{
    boundary_param, build_discrete_model, build_halfline_model, BoundaryParameter, BoundarySpec, CoeffSpec,
    DiscreteEllipticModel, DiscreteTriple, GridSpec, HalfLineModel, ProfilePiece, Quadrature,
};
use crate::random::{random_discrete, rng};
use crate::spectral::{resolvent_consistency, spectrum_sweep, sweep_csv};
use crate::triple::{identity_report, TripleModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    #[serde(alias = "green-check")]
    TripleCheck,
    KreinCheck,
    Hypotheses,
    DecayFit,
    BoundCertify,
    Sweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::TripleCheck => "triple-check",
            Experiment::KreinCheck => "krein-check",
            Experiment::Hypotheses => "hypotheses",
            Experiment::DecayFit => "decay-fit",
            Experiment::BoundCertify => "bound-certify",
            Experiment::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Discrete,
    Halfline,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default)]
    pub q0: f64,
    #[serde(default)]
    pub pieces: Vec<ProfilePiece>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub interior: usize,
    pub boundary: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl LambdaSpec {
    pub fn value(self) -> C {
        match self {
            LambdaSpec::Real(r) => C::new(r, 0.0),
            LambdaSpec::Complex { re, im } => C::new(re, im),
        }
    }
}

/// Absolute λ-range of the decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

fn default_samples() -> usize {
    16
}

fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<CoeffSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<Quadrature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomSpec>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<LambdaSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<FitWindow>,
    /// Decay reference point; defaults to min σ(A₀).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Number of decay samples.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn invalid(pointer: &str, message: impl Into<String>) -> Error {
    Error::ConfigInvalid { pointer: pointer.to_string(), message: message.into() }
}

/// Parses a config, reporting the JSON pointer of the first schema violation.
pub fn parse_config(text: &str) -> Result<Config> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
        let mut pointer = String::new();
        for seg in e.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
                Segment::Map { key } => pointer.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
                Segment::Enum { .. } | Segment::Unknown => {}
            }
        }
        invalid(&pointer, e.inner().to_string())
    })?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &Config) -> Result<()> {
    if cfg.jobs == 0 {
        return Err(invalid("/jobs", "jobs must be at least 1"));
    }
    match cfg.model {
        ModelKind::Discrete => {
            let grid = cfg.grid.as_ref().ok_or_else(|| invalid("/grid", "discrete model needs a grid"))?;
            if !(grid.h > 0.0 && grid.h.is_finite()) {
                return Err(invalid("/grid/h", format!("spacing must be positive, got {}", grid.h)));
            }
            for (i, e) in grid.extents.iter().enumerate() {
                if !(*e > 0.0 && e.is_finite()) {
                    return Err(invalid(&format!("/grid/extents/{i}"), format!("extent must be positive, got {e}")));
                }
            }
        }
        ModelKind::Halfline => {
            if let Some(q) = &cfg.quadrature {
                if !(q.dx > 0.0 && q.dx.is_finite()) {
                    return Err(invalid("/quadrature/dx", format!("dx must be positive, got {}", q.dx)));
                }
                if !(q.tail > 0.0 && q.tail.is_finite()) {
                    return Err(invalid("/quadrature/tail", format!("tail must be positive, got {}", q.tail)));
                }
            }
        }
        ModelKind::Random => {
            let r = cfg.random.as_ref().ok_or_else(|| invalid("/random", "random model needs sizes"))?;
            if r.interior == 0 {
                return Err(invalid("/random/interior", "need at least one interior node"));
            }
            if r.boundary == 0 {
                return Err(invalid("/random/boundary", "need at least one boundary node"));
            }
        }
    }
    if let Some(om) = &cfg.omegas {
        for (i, w) in om.iter().enumerate() {
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(invalid(&format!("/omegas/{i}"), format!("omega must be non-negative, got {w}")));
            }
        }
    }
    if cfg.experiment == Experiment::Sweep && cfg.omegas.as_ref().is_none_or(|o| o.is_empty()) {
        return Err(invalid("/omegas", "sweep needs a non-empty list of omegas"));
    }
    if let Some(w) = &cfg.fit_window {
        if !(w.lo < w.hi && w.lo.is_finite() && w.hi.is_finite()) {
            return Err(invalid("/fit_window", format!("need lo < hi, got [{}, {}]", w.lo, w.hi)));
        }
    }
    if cfg.samples < crate::bounds::MIN_DECAY_SAMPLES {
        return Err(invalid("/samples", format!("need at least {} samples", crate::bounds::MIN_DECAY_SAMPLES)));
    }
    Ok(())
}

/// A built model of any kind.
#[allow(clippy::large_enum_variant)]
pub enum AnyModel {
    Discrete(DiscreteEllipticModel),
    HalfLine(HalfLineModel),
    Random(DiscreteTriple),
}

impl AnyModel {
    pub fn triple(&self) -> &dyn TripleModel {
        match self {
            AnyModel::Discrete(m) => m,
            AnyModel::HalfLine(m) => m,
            AnyModel::Random(m) => m,
        }
    }

    /// Coordinates used to evaluate local and kernel boundary parameters.
    pub fn boundary_points(&self) -> Vec<[f64; 2]> {
        match self {
            AnyModel::Discrete(m) => m.boundary_points().to_vec(),
            AnyModel::HalfLine(_) => vec![[0.0, 0.0]],
            AnyModel::Random(m) => (0..m.n_boundary()).map(|i| [i as f64, 0.0]).collect(),
        }
    }

    fn grid_spacing(&self) -> Option<f64> {
        match self {
            AnyModel::Discrete(m) => Some(m.grid().h),
            _ => None,
        }
    }

    fn summary(&self) -> Value {
        let t = self.triple();
        let kind = match self {
            AnyModel::Discrete(_) => "discrete",
            AnyModel::HalfLine(_) => "halfline",
            AnyModel::Random(_) => "random",
        };
        json!({
            "kind": kind,
            "state_dim": t.state_dim(),
            "boundary_dim": t.boundary_dim(),
            "min_sigma_a0": t.min_sigma_a0(),
        })
    }
}

pub fn build_model(cfg: &Config) -> Result<AnyModel> {
    match cfg.model {
        ModelKind::Discrete => {
            let grid = cfg.grid.as_ref().ok_or_else(|| invalid("/grid", "discrete model needs a grid"))?;
            let coeff = cfg.coeff.clone().unwrap_or_default();
            build_discrete_model(grid, &coeff).map(AnyModel::Discrete).map_err(|e| match e {
                Error::BadGrid(m) => invalid("/grid", m),
                other => other,
            })
        }
        ModelKind::Halfline => {
            let pot = cfg.potential.clone().unwrap_or(PotentialSpec { q0: 0.0, pieces: Vec::new() });
            build_halfline_model(pot.q0, &pot.pieces, cfg.quadrature.unwrap_or_default())
                .map(AnyModel::HalfLine)
                .map_err(|e| match e {
                    Error::BadProfile(m) => invalid("/potential", m),
                    Error::BadGrid(m) => invalid("/quadrature", m),
                    other => other,
                })
        }
        ModelKind::Random => {
            let r = cfg.random.as_ref().ok_or_else(|| invalid("/random", "random model needs sizes"))?;
            Ok(AnyModel::Random(random_discrete(&mut rng(cfg.seed), r.interior, r.boundary)))
        }
    }
}

fn boundary_parameter(cfg: &Config, model: &AnyModel) -> Result<BoundaryParameter> {
    let points = model.boundary_points();
    match &cfg.b {
        None => Ok(BoundaryParameter::zero(points.len())),
        Some(spec) => boundary_param(spec, &points).map_err(|e| match e {
            Error::DimensionMismatch { expected, got } => {
                invalid("/B", format!("expected a {expected}x{expected} matrix, got {got} rows"))
            }
            other => other,
        }),
    }
}

/// Report files of one run, keyed by file name.
pub type Outputs = BTreeMap<String, String>;

fn json_text(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Runs the experiment on a pool of `cfg.jobs` workers.
pub fn run(cfg: &Config) -> Result<Outputs> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &Config) -> Result<Outputs> {
    let model = build_model(cfg)?;
    let b = boundary_parameter(cfg, &model)?;
    let t = model.triple();
    let mut out = Outputs::new();
    let header = json!({ "experiment": cfg.experiment.name(), "seed": cfg.seed, "model": model.summary() });
    match cfg.experiment {
        Experiment::TripleCheck => {
            let lambdas = real_lambdas(cfg, t)?;
            let report = identity_report(t, &lambdas, 20, &mut rng(cfg.seed))?;
            out.insert("report.json".into(), json_text(&json!({ "run": header, "identities": report })));
        }
        Experiment::KreinCheck => {
            let lambdas = match &cfg.lambdas {
                Some(l) => l.iter().map(|x| x.value()).collect(),
                None => {
                    let bottom = t.min_sigma_a0().min(t.min_sigma_robin(&b)?);
                    vec![C::new(bottom - 1.0, 0.0), C::new(bottom, 1.0)]
                }
            };
            let dev = resolvent_consistency(t, &b, &lambdas, cfg.seed)?;
            let rows: Vec<Value> = lambdas.iter().map(|l| json!({ "re": l.re, "im": l.im })).collect();
            out.insert(
                "report.json".into(),
                json_text(&json!({ "run": header, "lambdas": rows, "max_relative_deviation": dev })),
            );
        }
        Experiment::Hypotheses => {
            let lambdas: Vec<C> = match &cfg.lambdas {
                Some(l) => l.iter().map(|x| x.value()).collect(),
                None => default_hypothesis_lambdas(t),
            };
            let report = check_selfadjoint_hypotheses(t, &b, &lambdas);
            out.insert("hypotheses.json".into(), json_text(&json!({ "run": header, "report": report })));
        }
        Experiment::DecayFit => {
            let env = fit_envelope(cfg, &model)?;
            out.insert("samples.csv".into(), env.samples_csv());
            out.insert("envelope.json".into(), json_text(&json!({ "run": header, "envelope": envelope_json(&env) })));
        }
        Experiment::BoundCertify => {
            let min_sigma = t.min_sigma_robin(&b)?;
            let mut certs = Vec::new();
            if b.upper_bound() <= crate::bounds::NEGATIVITY_TOL {
                certs.push(negative_b_guarantee(t, &b)?);
            } else {
                let env = fit_envelope(cfg, &model)?;
                certs.push(lower_bound_decay(&env, &b, Some(t.min_sigma_a0())));
                if let AnyModel::Discrete(m) = &model {
                    if m.n_interior() <= crate::models::DENSE_LIMIT {
                        certs.push(form_lower_bound(m, &b)?);
                    }
                }
            }
            let tol = |v: f64| 1e-8 * (1.0 + v.abs());
            let rows: Vec<Value> = certs
                .iter()
                .map(|c| json!({ "certificate": c, "valid": c.value <= min_sigma + tol(c.value) }))
                .collect();
            out.insert(
                "certificates.json".into(),
                json_text(&json!({ "run": header, "min_sigma": min_sigma, "certificates": rows })),
            );
        }
        Experiment::Sweep => {
            let omegas = cfg.omegas.clone().unwrap_or_default();
            let a0 = t.min_sigma_a0();
            let needs_envelope = omegas.iter().any(|w| *w > 0.0) && b.upper_bound() > 0.0;
            let env = if needs_envelope { Some(fit_envelope(cfg, &model)?) } else { None };
            let certify = |bw: &BoundaryParameter| -> Result<BoundCertificate> {
                match &env {
                    Some(env) => Ok(lower_bound_decay(env, bw, Some(a0))),
                    None => negative_b_guarantee(t, bw),
                }
            };
            let rows = spectrum_sweep(t, &b, &omegas, certify)?;
            out.insert("sweep.csv".into(), sweep_csv(&rows));
            let mut summary = json!({ "run": header, "rows": rows.len() });
            if let Some(env) = &env {
                summary["envelope"] = envelope_json(env);
            }
            out.insert("sweep.json".into(), json_text(&summary));
        }
    }
    Ok(out)
}

fn envelope_json(env: &DecayEnvelope) -> Value {
    json!({
        "mu": env.mu,
        "c": env.c,
        "alpha": env.alpha,
        "raw_alpha": env.raw_alpha,
        "clamped": env.clamped,
        "monotone": env.monotone,
        "window": env.window,
        "samples": env.samples.len(),
        "all_satisfied": env.samples.iter().all(|s| env.satisfied(s)),
    })
}

/// Real λ's for identity checks: configured ones, or ten points below min σ(A₀).
fn real_lambdas(cfg: &Config, t: &dyn TripleModel) -> Result<Vec<f64>> {
    match &cfg.lambdas {
        Some(l) => l
            .iter()
            .enumerate()
            .map(|(i, x)| match x {
                LambdaSpec::Real(r) => Ok(*r),
                _ => Err(invalid(&format!("/lambdas/{i}"), "identity checks need real lambdas")),
            })
            .collect(),
        None => {
            let bottom = t.min_sigma_a0();
            Ok((1..=10).map(|k| bottom - 0.5 * k as f64).collect())
        }
    }
}

/// Samples ‖M(λ)‖ on the configured window and fits the envelope.
pub fn fit_envelope(cfg: &Config, model: &AnyModel) -> Result<DecayEnvelope> {
    let t = model.triple();
    let mu = cfg.mu.unwrap_or_else(|| t.min_sigma_a0());
    let window = cfg.fit_window.unwrap_or(FitWindow { lo: mu - 1e4, hi: mu - 1e2 });
    if window.hi >= mu {
        return Err(invalid("/fit_window", format!("window must lie below mu = {mu}")));
    }
    if let Some(h) = model.grid_spacing() {
        // the discrete Weyl function leaves the continuum regime near |λ| ~ h⁻²
        let crossover = h.powi(-2);
        if crossover < 10.0 * (mu - window.lo) {
            return Err(invalid(
                "/fit_window",
                format!(
                    "h^-2 = {crossover:.3e} is below 10 (mu - lo) = {:.3e}; discrete saturation sets in near lambda = {:.3e}",
                    10.0 * (mu - window.lo),
                    mu - crossover
                ),
            ));
        }
    }
    let lambdas = geometric_window(mu, mu - window.hi, mu - window.lo, cfg.samples);
    let samples = sample_weyl_norms(t, &lambdas)?;
    decay_fit(&samples, mu)
}

/// Result of a full run including file output.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub error: Option<Error>,
    pub out_dir: PathBuf,
}

/// Overrides coming from the command line.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

fn error_json(e: &Error) -> String {
    let mut v = json!({ "kind": e.kind(), "message": e.to_string() });
    if let Error::ConfigInvalid { pointer, .. } = e {
        v["pointer"] = json!(pointer);
    }
    json_text(&v)
}

fn write_outputs(dir: &Path, files: &Outputs) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Reads, validates and runs a config file, writing reports (or error.json)
/// into the output directory.
pub fn run_file(path: &Path, overrides: &Overrides) -> RunOutcome {
    let fallback = overrides.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let err = invalid("", format!("cannot read {}: {e}", path.display()));
            return finish_error(err, fallback);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return finish_error(e, fallback),
    };
    if let Some(x) = overrides.experiment {
        cfg.experiment = x;
    }
    if let Some(j) = overrides.jobs {
        if j == 0 {
            return finish_error(invalid("/jobs", "jobs must be at least 1"), fallback);
        }
        cfg.jobs = j;
    }
    let out_dir = overrides
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or(fallback);
    if let Err(e) = validate(&cfg) {
        return finish_error(e, out_dir);
    }
    match run(&cfg) {
        Ok(files) => match write_outputs(&out_dir, &files) {
            Ok(()) => RunOutcome { exit_code: EXIT_OK, error: None, out_dir },
            Err(e) => finish_error(e, out_dir),
        },
        Err(e) => finish_error(e, out_dir),
    }
}

fn finish_error(e: Error, out_dir: PathBuf) -> RunOutcome {
    let code = match e {
        Error::ConfigInvalid { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    };
    let mut files = Outputs::new();
    files.insert("error.json".into(), error_json(&e));
    // best effort: the error is also returned to the caller
    let _ = write_outputs(&out_dir, &files);
    RunOutcome { exit_code: code, error: Some(e), out_dir }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_spacing_points_at_grid_h() {
        let text = r#"{"experiment":"triple-check","model":"discrete",
            "grid":{"shape":"interval","extents":[1.0],"h":-0.1}}"#;
        match parse_config(text) {
            Err(Error::ConfigInvalid { pointer, .. }) => assert_eq!(pointer, "/grid/h"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_pointer() {
        let text = r#"{"experiment":"sweep","model":"halfline","omegas":[1.0,"x"]}"#;
        match parse_config(text) {
            Err(Error::ConfigInvalid { pointer, .. }) => assert_eq!(pointer, "/omegas/1"),
            other => panic!("{other:?}"),
        }
        let text = r#"{"experiment":"sweep","model":"halfline","omegas":[1.0],"bogus":1}"#;
        assert!(matches!(parse_config(text), Err(Error::ConfigInvalid { .. })));
        let text = r#"{"experiment":"nope","model":"halfline"}"#;
        match parse_config(text) {
            Err(Error::ConfigInvalid { pointer, .. }) => assert_eq!(pointer, "/experiment"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lambdas_accept_real_and_complex() {
        let text = r#"{"experiment":"krein-check","model":"halfline","lambdas":[-4.0,{"re":-1.0,"im":2.0}]}"#;
        let cfg = parse_config(text).unwrap();
        let l: Vec<C> = cfg.lambdas.unwrap().iter().map(|x| x.value()).collect();
        assert_eq!(l, vec![C::new(-4.0, 0.0), C::new(-1.0, 2.0)]);
    }

    #[test]
    fn coarse_grid_window_is_refused() {
        let text = r#"{"experiment":"decay-fit","model":"discrete",
            "grid":{"shape":"rectangle","extents":[1.0,1.0],"h":0.1}}"#;
        let cfg = parse_config(text).unwrap();
        match run(&cfg) {
            Err(Error::ConfigInvalid { pointer, message }) => {
                assert_eq!(pointer, "/fit_window");
                assert!(message.contains("saturation"));
            }
            other => panic!("{other:?}"),
        }
    }
}
