//! The banded (large-model) path must agree with the dense path.

use quasitriple::linalg::{c, CVec, C};
use quasitriple::models::{build_discrete_model, BoundaryParameter, CoeffSpec, Coefficient, CosineField, GridSpec};
use quasitriple::{Error, TripleModel};

fn coeffs() -> CoeffSpec {
    let field = |base, amp, kx, ky| Coefficient::Field(CosineField { base, amp, kx, ky, phase_x: 0.3, phase_y: -0.2 });
    CoeffSpec { a11: field(1.5, 0.3, 2.0, 1.0), a22: field(1.0, 0.2, 1.0, 3.0), a12: field(0.1, 0.1, 1.0, 1.0), a: field(0.5, 0.4, 3.0, 2.0) }
}

fn pair() -> (quasitriple::models::DiscreteEllipticModel, quasitriple::models::DiscreteEllipticModel) {
    let grid = GridSpec::strip(1.0, 0.5, 1.0 / 16.0);
    let dense = build_discrete_model(&grid, &coeffs()).unwrap();
    let banded = build_discrete_model(&grid, &coeffs()).unwrap().with_dense_limit(10);
    assert!(dense.is_dense() && !banded.is_dense());
    (dense, banded)
}

#[test]
fn bottom_of_spectrum_agrees() {
    let (d, b) = pair();
    assert!((d.min_sigma_a0() - b.min_sigma_a0()).abs() < 1e-9 * d.spectral_scale(), "{} {}", d.min_sigma_a0(), b.min_sigma_a0());
    let dd = d.min_sigma_dirichlet().unwrap();
    let bd = b.min_sigma_dirichlet().unwrap();
    assert!((dd - bd).abs() < 1e-9 * d.spectral_scale(), "{dd} {bd}");
    for s in [-2.0, 0.5, 3.0, 20.0] {
        let p = d.sample_boundary(|x, y| s * (1.0 + 0.5 * (x + y).sin())).unwrap();
        let a = d.min_sigma_robin(&p).unwrap();
        let e = b.min_sigma_robin(&p).unwrap();
        assert!((a - e).abs() < 1e-8 * (1.0 + a.abs()), "{s}: {a} {e}");
    }
}

#[test]
fn weyl_and_resolvents_agree() {
    let (d, b) = pair();
    let lam = d.min_sigma_a0() - 7.0;
    let wd = d.weyl(c(lam)).unwrap();
    let wb = b.weyl(c(lam)).unwrap();
    assert!((&wd.matrix - &wb.matrix).norm() < 1e-10 * wd.matrix.norm());
    let nd = d.weyl_norm(lam).unwrap();
    let nb = b.weyl_norm(lam).unwrap();
    assert!((nd - nb).abs() < 1e-9 * nd, "{nd} {nb}");
    let phi = CVec::from_fn(d.n_boundary(), |i, _| C::new((i as f64).cos(), 0.5));
    let gd = d.gamma_field(c(lam), &phi).unwrap();
    let gb = b.gamma_field(c(lam), &phi).unwrap();
    assert!((gd.interior - gb.interior).norm() < 1e-10 * phi.norm());
    let f = CVec::from_fn(d.n_interior(), |i, _| C::new((0.3 * i as f64).sin(), 1.0));
    let rd = d.resolvent_a0_state(c(lam), &f).unwrap();
    let rb = b.resolvent_a0_state(c(lam), &f).unwrap();
    assert!((rd.interior - rb.interior).norm() < 1e-10 * f.norm());
    let p = BoundaryParameter::scalar(d.n_boundary(), 2.0);
    let lam = d.min_sigma_robin(&p).unwrap() - 1.0;
    let xd = d.robin_resolvent(&p, c(lam), &f).unwrap();
    let xb = b.robin_resolvent(&p, c(lam), &f).unwrap();
    assert!((&xd - xb).norm() < 1e-9 * xd.norm());
}

#[test]
fn banded_path_rejects_complex_lambda() {
    let (_, b) = pair();
    let phi = CVec::from_element(b.n_boundary(), c(1.0));
    assert!(matches!(b.gamma_field(C::new(0.0, 1.0), &phi), Err(Error::Unsupported(_))));
}
