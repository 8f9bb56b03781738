//! The boundary-triple interface shared by every model, plus the γ-field,
//! Weyl function and identity checks built on top of it.
//!
//! A model realizes a maximal operator `T` on extended states together with two
//! boundary maps: `Γ₀` (conormal flux) and `Γ₁` (Dirichlet trace). Everything
//! else in the crate (Krein formula, lower bounds, sweeps) talks to models only
//! through [`TripleModel`].

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMat, CVec, C};
use crate::random::{random_cvec, random_state};
use crate::models::BoundaryParameter;

/// An element of `dom T`: the Hilbert-space part together with the boundary
/// data needed to evaluate `T`, `Γ₀` and `Γ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    pub interior: CVec,
    pub boundary: CVec,
}

impl ExtendedState {
    pub fn new(interior: CVec, boundary: CVec) -> Self {
        ExtendedState { interior, boundary }
    }

    pub fn zeros(state_dim: usize, boundary_len: usize) -> Self {
        ExtendedState {
            interior: CVec::zeros(state_dim),
            boundary: CVec::zeros(boundary_len),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.interior.norm_squared() + self.boundary.norm_squared()).sqrt()
    }
}

/// M(λ) evaluated at one spectral parameter.
#[derive(Debug, Clone)]
pub struct WeylValue {
    pub lambda: C,
    pub matrix: CMat,
}

impl WeylValue {
    /// Operator norm; for real λ the matrix is Hermitian and this is its
    /// largest eigenvalue in modulus.
    pub fn norm(&self) -> f64 {
        if self.lambda.im == 0.0 {
            hermitian_eigenvalues(&self.matrix)
                .into_iter()
                .fold(0.0, |m, e| m.max(e.abs()))
        } else {
            crate::linalg::spectral_norm(&self.matrix)
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }
}

/// Spectral threshold for "λ is on the spectrum": distance below
/// `NEAR_SPECTRUM_REL` times the model's spectral scale.
pub const NEAR_SPECTRUM_REL: f64 = 1e-8;

pub trait TripleModel: Send + Sync {
    /// Dimension of the Hilbert-space representation.
    fn state_dim(&self) -> usize;
    /// Dimension of the boundary space.
    fn boundary_dim(&self) -> usize;
    /// Length of [`ExtendedState::boundary`] for this model.
    fn boundary_len(&self) -> usize {
        self.boundary_dim()
    }

    /// Hilbert-space inner product, linear in `f`, antilinear in `g`.
    fn inner_state(&self, f: &CVec, g: &CVec) -> C;
    /// Boundary-space inner product.
    fn inner_boundary(&self, a: &CVec, b: &CVec) -> C;

    fn apply_t(&self, u: &ExtendedState) -> CVec;
    fn trace0(&self, u: &ExtendedState) -> CVec;
    fn trace1(&self, u: &ExtendedState) -> CVec;

    /// min σ(A₀), computed once.
    fn min_sigma_a0(&self) -> f64;
    /// Magnitude used to scale "near the spectrum" tolerances.
    fn spectral_scale(&self) -> f64;
    /// Bound on the entries of T and Γ₀ as matrices, for round-off scales.
    fn operator_scale(&self) -> f64 {
        self.spectral_scale()
    }

    /// The unique u with (T − λ)u = 0 and Γ₀u = φ.
    fn gamma_field(&self, lambda: C, phi: &CVec) -> Result<ExtendedState>;
    fn weyl(&self, lambda: C) -> Result<WeylValue>;
    /// ‖M(λ)‖ for real λ below min σ(A₀).
    fn weyl_norm(&self, lambda: f64) -> Result<f64> {
        Ok(self.weyl(C::new(lambda, 0.0))?.norm())
    }
    /// The state (A₀ − λ)⁻¹f as an element of dom T (so Γ₁ of it is available).
    fn resolvent_a0_state(&self, lambda: C, f: &CVec) -> Result<ExtendedState>;

    /// (A_[B] − λ)⁻¹ f by a direct solve that does not go through M or γ.
    fn robin_resolvent(&self, b: &BoundaryParameter, lambda: C, f: &CVec) -> Result<CVec>;
    /// min σ(A_[B]).
    fn min_sigma_robin(&self, b: &BoundaryParameter) -> Result<f64>;
    /// min σ(A₁), the Dirichlet realization (upper anchor for coupling sweeps).
    fn min_sigma_dirichlet(&self) -> Result<f64>;
    /// Whether A₁ is represented by a Hermitian matrix.
    fn dirichlet_is_hermitian(&self) -> bool {
        true
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub fn gamma_field<M: TripleModel + ?Sized>(model: &M, lambda: C, phi: &CVec) -> Result<ExtendedState> {
    check_len(model.boundary_dim(), phi.len())?;
    model.gamma_field(lambda, phi)
}

pub fn weyl<M: TripleModel + ?Sized>(model: &M, lambda: C) -> Result<WeylValue> {
    model.weyl(lambda)
}

/// γ(λ)* f = Γ₁(A₀ − λ̄)⁻¹ f.
pub fn gamma_adjoint<M: TripleModel + ?Sized>(model: &M, lambda: C, f: &CVec) -> Result<CVec> {
    check_len(model.state_dim(), f.len())?;
    let u = model.resolvent_a0_state(lambda.conj(), f)?;
    Ok(model.trace1(&u))
}

/// |(Tf,g) − (f,Tg) − [(Γ₁f,Γ₀g) − (Γ₀f,Γ₁g)]|.
pub fn green_residual<M: TripleModel + ?Sized>(model: &M, f: &ExtendedState, g: &ExtendedState) -> f64 {
    let tf = model.apply_t(f);
    let tg = model.apply_t(g);
    let lhs = model.inner_state(&tf, &g.interior) - model.inner_state(&f.interior, &tg);
    let rhs = model.inner_boundary(&model.trace1(f), &model.trace0(g))
        - model.inner_boundary(&model.trace0(f), &model.trace1(g));
    (lhs - rhs).norm()
}

/// |central difference of (M(·)φ,φ) at λ − ‖γ(λ)φ‖²|.
pub fn weyl_derivative_residual<M: TripleModel + ?Sized>(
    model: &M,
    lambda: f64,
    phi: &CVec,
    step: f64,
) -> Result<f64> {
    check_len(model.boundary_dim(), phi.len())?;
    if phi.iter().all(|z| *z == C::new(0.0, 0.0)) {
        return Ok(0.0);
    }
    let quad = |l: f64| -> Result<f64> {
        let m = model.weyl(C::new(l, 0.0))?;
        Ok(model.inner_boundary(&(&m.matrix * phi), phi).re)
    };
    let fd = (quad(lambda + step)? - quad(lambda - step)?) / (2.0 * step);
    let g = model.gamma_field(C::new(lambda, 0.0), phi)?;
    let norm2 = model.inner_state(&g.interior, &g.interior).re;
    Ok((fd - norm2).abs())
}

/// Green residual divided by operator_scale·(‖f‖ + ‖g‖)².
pub fn green_residual_scaled<M: TripleModel + ?Sized>(model: &M, f: &ExtendedState, g: &ExtendedState) -> f64 {
    let s = f.norm() + g.norm();
    if s == 0.0 {
        return 0.0;
    }
    green_residual(model, f, g) / (model.operator_scale() * s * s)
}

/// Summary of the identity checks on one model.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub green_max_residual: f64,
    /// Green residual relative to operator_scale·(‖f‖ + ‖g‖)²
    pub green_max_scaled: f64,
    /// max ‖(T − λ)γφ‖ and ‖Γ₀γφ − φ‖, relative to operator_scale·‖φ‖
    pub gamma_max_residual: f64,
    /// max |(γφ, f) − (φ, γ*f)| / (‖γφ‖‖f‖ + ‖φ‖‖γ*f‖)
    pub adjoint_max_residual: f64,
    /// max ‖M(λ̄) − M(λ)ᴴ‖ / ‖M(λ)‖ at λ + i
    pub weyl_symmetry_max: f64,
    /// (M(λ)φ, φ) strictly increasing over the sorted real λ's
    pub monotone: bool,
    /// smallest eigenvalue of M(λ) positive at every real λ
    pub positive: bool,
    pub min_weyl_eigenvalue: f64,
}

/// Runs the identity checks with `pairs` random state pairs and, at each real
/// λ (all below min σ(A₀)), one random φ, one random f and the monotonicity
/// and positivity checks.
pub fn identity_report<M: TripleModel + ?Sized>(
    model: &M,
    lambdas: &[f64],
    pairs: usize,
    rng: &mut impl Rng,
) -> Result<IdentityReport> {
    let (n, nb, bl) = (model.state_dim(), model.boundary_dim(), model.boundary_len());
    let mut green_max_residual = 0.0f64;
    let mut green_max_scaled = 0.0f64;
    for _ in 0..pairs {
        let f = random_state(rng, n, bl);
        let g = random_state(rng, n, bl);
        green_max_residual = green_max_residual.max(green_residual(model, &f, &g));
        green_max_scaled = green_max_scaled.max(green_residual_scaled(model, &f, &g));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut gamma_max_residual = 0.0f64;
    let mut adjoint_max_residual = 0.0f64;
    let mut weyl_symmetry_max = 0.0f64;
    let mut min_weyl_eigenvalue = f64::INFINITY;
    let phi_test = random_cvec(rng, nb);
    let mut quad = Vec::with_capacity(sorted.len());
    for &l in &sorted {
        let lambda = C::new(l, 0.0);
        let phi = random_cvec(rng, nb);
        let u = gamma_field(model, lambda, &phi)?;
        let interior = model.apply_t(&u) - &u.interior * lambda;
        let flux = model.trace0(&u) - &phi;
        let scale = model.operator_scale() * phi.norm();
        gamma_max_residual = gamma_max_residual.max(interior.norm().max(flux.norm()) / scale);

        let f = random_cvec(rng, n);
        let adj = gamma_adjoint(model, lambda, &f)?;
        let lhs = model.inner_state(&u.interior, &f);
        let rhs = model.inner_boundary(&phi, &adj);
        let denom = u.interior.norm() * f.norm() + phi.norm() * adj.norm();
        adjoint_max_residual = adjoint_max_residual.max((lhs - rhs).norm() / denom.max(f64::MIN_POSITIVE));

        let m = model.weyl(lambda)?;
        min_weyl_eigenvalue = min_weyl_eigenvalue.min(m.min_eigenvalue());
        quad.push(model.inner_boundary(&(&m.matrix * &phi_test), &phi_test).re);

        let up = model.weyl(C::new(l, 1.0))?.matrix;
        let down = model.weyl(C::new(l, -1.0))?.matrix;
        weyl_symmetry_max = weyl_symmetry_max.max((&down - up.adjoint()).norm() / up.norm());
    }
    Ok(IdentityReport {
        green_max_residual,
        green_max_scaled,
        gamma_max_residual,
        adjoint_max_residual,
        weyl_symmetry_max,
        monotone: quad.windows(2).all(|w| w[1] > w[0]),
        positive: min_weyl_eigenvalue > 0.0,
        min_weyl_eigenvalue,
    })
}
