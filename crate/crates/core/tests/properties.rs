use proptest::prelude::*;
use quasitriple::bounds::{asymptotic_slope, decay_fit, form_lower_bound, negative_b_guarantee};
use quasitriple::krein::{krein_resolvent, split_pm_matrix};
use quasitriple::linalg::{c, hermitian_eigenvalues, CVec, C};
use quasitriple::models::{build_discrete_model, BoundaryParameter, CoeffSpec, Coefficient, CosineField, GridSpec};
use quasitriple::random::{
    random_boundary_parameter, random_cvec, random_discrete, random_hermitian, random_nonpositive, random_state, rng,
};
use quasitriple::triple::{green_residual_scaled, weyl};
use quasitriple::TripleModel;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn green_identity_holds(seed in any::<u64>(), ni in 2usize..60, nb in 1usize..12) {
        let mut r = rng(seed);
        let m = random_discrete(&mut r, ni, nb);
        let f = random_state(&mut r, ni, nb);
        let g = random_state(&mut r, ni, nb);
        prop_assert!(green_residual_scaled(&m, &f, &g) <= 1e-10);
    }

    #[test]
    fn weyl_is_positive_and_increasing(seed in any::<u64>(), shift in 0.05f64..20.0) {
        let mut r = rng(seed);
        let m = random_discrete(&mut r, 15, 4);
        let lo = m.min_sigma_a0() - shift - 0.5;
        let hi = m.min_sigma_a0() - shift;
        let phi = random_cvec(&mut r, 4);
        let q = |l: f64| {
            let w = weyl(&m, C::new(l, 0.0)).unwrap();
            prop_assert!(w.min_eigenvalue() > 0.0);
            Ok(m.inner_boundary(&(&w.matrix * &phi), &phi).re)
        };
        prop_assert!(q(lo)? < q(hi)?);
    }

    #[test]
    fn krein_matches_direct_solve(seed in any::<u64>(), re in -5.0f64..5.0, im in 0.2f64..3.0) {
        let mut r = rng(seed);
        let m = random_discrete(&mut r, 12, 3);
        let b = random_boundary_parameter(&mut r, 3, 1.0);
        let f = random_cvec(&mut r, 12);
        let lam = C::new(re, im);
        let k = krein_resolvent(&m, &b, lam, &f).unwrap();
        let d = m.robin_resolvent(&b, lam, &f).unwrap();
        prop_assert!((k - &d).norm() <= 1e-8 * d.norm());
    }

    #[test]
    fn split_reconstructs(seed in any::<u64>(), n in 1usize..8, scale in 0.1f64..10.0) {
        let b = random_hermitian(&mut rng(seed), n, scale);
        let (p, q) = split_pm_matrix(&b).unwrap();
        let norm = b.norm().max(f64::MIN_POSITIVE);
        prop_assert!((&p - &q - &b).norm() <= 1e-12 * norm);
        prop_assert!((&p * &q).norm() <= 1e-12 * norm * norm);
        prop_assert!(hermitian_eigenvalues(&p)[0] >= -1e-12 * norm);
        prop_assert!(hermitian_eigenvalues(&q)[0] >= -1e-12 * norm);
    }

    #[test]
    fn nonpositive_coupling_never_lowers_the_bottom(seed in any::<u64>(), scale in 0.1f64..5.0) {
        let mut r = rng(seed);
        let m = random_discrete(&mut r, 20, 5);
        let b = random_nonpositive(&mut r, 5, scale);
        let cert = negative_b_guarantee(&m, &b).unwrap();
        prop_assert!(m.min_sigma_robin(&b).unwrap() >= cert.value - 1e-8);
    }

    #[test]
    fn decay_envelope_covers_every_sample(
        c0 in 0.1f64..10.0,
        alpha in 0.1f64..1.0,
        mu in -5.0f64..5.0,
        wiggle in proptest::collection::vec(-0.2f64..0.2, 12),
    ) {
        let samples: Vec<(f64, f64)> = wiggle
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let d = 1.5f64.powi(k as i32 + 1);
                (mu - d, c0 * d.powf(-alpha) * (1.0 + w))
            })
            .collect();
        let env = decay_fit(&samples, mu).unwrap();
        prop_assert!(env.samples.iter().all(|s| env.satisfied(s)));
        prop_assert!(env.alpha <= 1.0);
    }

    #[test]
    fn slope_of_power_law(p in 0.5f64..3.0, a in 0.1f64..10.0) {
        let omegas: Vec<f64> = (0..7).map(|k| 2f64.powi(k)).collect();
        let sig: Vec<f64> = omegas.iter().map(|w| -a * w.powf(p)).collect();
        prop_assert!((asymptotic_slope(&omegas, &sig).unwrap() - p).abs() < 1e-10);
    }

    #[test]
    fn form_certificate_is_valid(seed in any::<u64>(), amp in 0.0f64..0.5, bscale in 0.1f64..20.0) {
        let coeff = CoeffSpec {
            a11: Coefficient::Field(CosineField { base: 1.0, amp, kx: 3.0, ky: 1.0, phase_x: 0.0, phase_y: 0.0 }),
            a22: Coefficient::Constant(1.5),
            a12: Coefficient::Constant(0.2),
            a: Coefficient::Constant(0.1),
        };
        let m = build_discrete_model(&GridSpec::rectangle(0.5, 0.5, 0.0625), &coeff).unwrap();
        let b = random_boundary_parameter(&mut rng(seed), m.n_boundary(), bscale);
        let cert = form_lower_bound(&m, &b).unwrap();
        let exact = m.min_sigma_robin(&b).unwrap();
        prop_assert!(cert.value <= exact + 1e-8 * (1.0 + cert.value.abs()));
    }

    #[test]
    fn scaling_b_scales_upper_bound(seed in any::<u64>(), omega in 0.0f64..10.0) {
        let b = random_boundary_parameter(&mut rng(seed), 4, 1.0);
        let s = b.scaled(omega);
        prop_assert!((s.upper_bound() - omega * b.upper_bound()).abs() <= 1e-12 * (1.0 + omega));
        prop_assert_eq!(BoundaryParameter::zero(4).upper_bound(), 0.0);
    }
}

#[test]
fn zero_vector_has_zero_resolvent() {
    let m = random_discrete(&mut rng(1), 10, 2);
    let b = random_boundary_parameter(&mut rng(2), 2, 1.0);
    let u = krein_resolvent(&m, &b, C::new(0.0, 1.0), &CVec::zeros(10)).unwrap();
    assert_eq!(u.norm(), 0.0);
    assert_eq!(c(0.0), u[0]);
}
