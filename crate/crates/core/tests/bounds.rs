use quasitriple::bounds::{
    asymptotic_slope, decay_fit, excess_below_bottom, form_lower_bound, geometric_window, lower_bound_decay,
    negative_b_guarantee, sample_weyl_norms, trace_constant, Provenance, Route,
};
use quasitriple::linalg::{c, CMat, CVec};
use quasitriple::models::{build_discrete_model, free_halfline, BoundaryParameter, CoeffSpec, GridSpec};
use quasitriple::random::{random_boundary_parameter, random_discrete, random_nonpositive, rng};
use quasitriple::{Error, TripleModel};

fn interval(h: f64) -> quasitriple::models::DiscreteEllipticModel {
    build_discrete_model(&GridSpec::interval(1.0, h), &CoeffSpec::laplacian()).unwrap()
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn exact_power_law_is_recovered() {
    let samples: Vec<(f64, f64)> = (1..=10).map(|k| {
        let d = 2f64.powi(k);
        (-d, 1.0 / d.sqrt())
    }).collect();
    let env = decay_fit(&samples, 0.0).unwrap();
    assert!((env.alpha - 0.5).abs() < 1e-10);
    assert!((env.c - 1.0).abs() < 1e-10);
    assert!(env.samples.iter().all(|s| env.satisfied(s)));
}

#[test]
fn inverse_law_sits_on_the_clamp() {
    let samples: Vec<(f64, f64)> = (1..=10).map(|k| {
        let d = 2f64.powi(k);
        (1.0 - d, 3.0 / d)
    }).collect();
    let env = decay_fit(&samples, 1.0).unwrap();
    assert!((env.alpha - 1.0).abs() < 1e-10);
    assert!(!env.clamped);
    assert!((env.c - 3.0).abs() < 1e-10);

    let steep: Vec<(f64, f64)> = (1..=10).map(|k| {
        let d = 2f64.powi(k);
        (-d, d.powf(-1.5))
    }).collect();
    let env = decay_fit(&steep, 0.0).unwrap();
    assert!(env.clamped);
    assert_eq!(env.alpha, 1.0);
    assert!(env.samples.iter().all(|s| env.satisfied(s)));
}

#[test]
fn decay_fit_rejects_bad_samples() {
    assert!(matches!(decay_fit(&[(-1.0, 1.0); 3], 0.0), Err(Error::BadSamples(_))));
    let above: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 1.0)).collect();
    assert!(matches!(decay_fit(&above, 0.0), Err(Error::BadSamples(_))));
}

#[test]
fn halfline_envelope_is_half_space_law() {
    let m = free_halfline(0.0);
    let lambdas = geometric_window(0.0, 10.0, 1e4, 24);
    let samples = sample_weyl_norms(&m, &lambdas).unwrap();
    let env = decay_fit(&samples, 0.0).unwrap();
    assert!((0.499..=0.501).contains(&env.alpha), "{}", env.alpha);
    assert!((0.99..=1.01).contains(&env.c), "{}", env.c);
    assert!(env.monotone);
}

#[test]
fn decay_bound_arithmetic() {
    let samples: Vec<(f64, f64)> = (1..=10).map(|k| {
        let d = 2f64.powi(k);
        (-d, 1.0 / d.sqrt())
    }).collect();
    let mut env = decay_fit(&samples, 0.0).unwrap();
    env.c = 1.0;
    let cert = lower_bound_decay(&env, &BoundaryParameter::scalar(4, 3.0), None);
    assert_eq!(cert.value, -9.0);
    assert_eq!(cert.route, Route::Decay);

    let neg = lower_bound_decay(&env, &BoundaryParameter::scalar(4, -2.0), Some(0.25));
    assert_eq!(neg.route, Route::Negativity);
    assert_eq!(neg.value, 0.25);
}

#[test]
fn halfline_decay_bound_is_sharp() {
    let m = free_halfline(0.0);
    let samples = sample_weyl_norms(&m, &geometric_window(0.0, 1.0, 1e4, 24)).unwrap();
    let env = decay_fit(&samples, 0.0).unwrap();
    let b = BoundaryParameter::scalar(1, 2.0);
    let cert = lower_bound_decay(&env, &b, Some(0.0));
    let exact = m.min_sigma_robin(&b).unwrap();
    assert!((cert.value + 4.0).abs() < 1e-8, "{}", cert.value);
    assert!((exact + 4.0).abs() < 1e-8);
    assert!(cert.value <= exact + 1e-8 * (1.0 + exact.abs()));
    match cert.provenance {
        Provenance::Decay { heuristic, .. } => assert!(!heuristic),
        other => panic!("{other:?}"),
    }
}

#[test]
fn negativity_route() {
    let mut r = rng(30);
    let m = random_discrete(&mut r, 20, 4);
    let zero = negative_b_guarantee(&m, &BoundaryParameter::zero(4)).unwrap();
    assert_eq!(zero.value, m.min_sigma_a0());
    assert_eq!(m.min_sigma_robin(&BoundaryParameter::zero(4)).unwrap(), m.min_sigma_a0());
    for _ in 0..10 {
        let b = random_nonpositive(&mut r, 4, 1.5);
        let cert = negative_b_guarantee(&m, &b).unwrap();
        assert!(m.min_sigma_robin(&b).unwrap() >= cert.value - 1e-8);
    }
    let mut tiny = CMat::from_diagonal(&CVec::from_element(4, c(-1.0)));
    tiny[(2, 2)] = c(1e-3);
    let b = BoundaryParameter::nonlocal(tiny).unwrap();
    assert!(matches!(negative_b_guarantee(&m, &b), Err(Error::NotNegative { .. })));
}

#[test]
fn trace_constant_behaves_like_inverse_eps() {
    let m = interval(1.0 / 400.0);
    let eps = [0.01, 0.02, 0.04];
    let beta: Vec<f64> = eps.iter().map(|&e| trace_constant(&m, e).unwrap()).collect();
    let slope = loglog_slope(&eps, &beta);
    assert!((-1.1..=-0.9).contains(&slope), "{slope} {beta:?}");
}

// constants force β ≥ |∂Ω|/|Ω| = 2 on the unit interval
#[test]
fn trace_constant_decreases_to_boundary_ratio() {
    let m = interval(1.0 / 50.0);
    let beta: Vec<f64> = [0.1, 1.0, 10.0, 1e3, 1e6].iter().map(|&e| trace_constant(&m, e).unwrap()).collect();
    assert!(beta.windows(2).all(|w| w[1] <= w[0]), "{beta:?}");
    assert!((beta[4] - 2.0).abs() < 1e-4, "{beta:?}");
    assert!(trace_constant(&m, 1e-4).unwrap().is_infinite());
}

#[test]
fn trace_constant_converges_under_refinement() {
    let beta: Vec<f64> = [50.0, 100.0, 200.0].iter().map(|&n| trace_constant(&interval(1.0 / n), 0.1).unwrap()).collect();
    assert!((beta[2] - beta[1]).abs() <= 0.02 * beta[2], "{beta:?}");
    assert!((beta[1] - beta[0]).abs() <= 0.02 * beta[1], "{beta:?}");
}

#[test]
fn form_bound_grows_like_b_squared() {
    let m = interval(1.0 / 400.0);
    let bs = [4.0, 8.0, 16.0, 32.0];
    let vals: Vec<f64> = bs
        .iter()
        .map(|&b| -form_lower_bound(&m, &BoundaryParameter::scalar(2, b)).unwrap().value)
        .collect();
    let slope = loglog_slope(&bs, &vals);
    assert!((1.9..=2.1).contains(&slope), "{slope} {vals:?}");
}

#[test]
fn form_bound_is_valid() {
    let mut r = rng(31);
    let models = [
        interval(1.0 / 40.0),
        build_discrete_model(&GridSpec::rectangle(1.0, 1.0, 0.1), &CoeffSpec::constant(2.0, 1.0, 0.5, 0.3)).unwrap(),
    ];
    for m in &models {
        let nb = m.n_boundary();
        for _ in 0..10 {
            let b = random_boundary_parameter(&mut r, nb, 3.0);
            let cert = form_lower_bound(m, &b).unwrap();
            let exact = m.min_sigma_robin(&b).unwrap();
            assert!(cert.value <= exact + 1e-8 * (1.0 + cert.value.abs()), "{} {exact}", cert.value);
        }
        let neg = form_lower_bound(m, &BoundaryParameter::scalar(nb, -1.0)).unwrap();
        assert_eq!(neg.route, Route::Negativity);
    }
}

#[test]
fn halfline_slope_is_exactly_two() {
    let m = free_halfline(0.0);
    let omegas = [4.0, 8.0, 16.0, 32.0, 64.0];
    let sig: Vec<f64> = omegas
        .iter()
        .map(|&w| m.min_sigma_robin(&BoundaryParameter::scalar(1, w)).unwrap())
        .collect();
    let slope = asymptotic_slope(&omegas, &sig).unwrap();
    assert!((slope - 2.0).abs() < 1e-6, "{slope}");
    assert!(matches!(asymptotic_slope(&omegas, &[1.0; 5]), Err(Error::BadSamples(_))));
}

#[test]
fn small_coupling_excess_is_controlled() {
    let m = free_halfline(0.0);
    let samples = sample_weyl_norms(&m, &geometric_window(0.0, 1e-3, 1e4, 40)).unwrap();
    let env = decay_fit(&samples, 0.0).unwrap();
    for k in 0..=6 {
        let w = 0.5f64.powi(k);
        let s = m.min_sigma_robin(&BoundaryParameter::scalar(1, w)).unwrap();
        let excess = excess_below_bottom(0.0, s);
        assert!(excess <= (env.c * w).powf(1.0 / env.alpha) * (1.0 + 1e-8), "{w}: {excess}");
    }
}
