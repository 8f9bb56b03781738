//! Half-line Schrödinger operator `−d²/dx² + q` on (0, ∞) with
//! `Γ₀f = −f′(0)`, `Γ₁f = f(0)` and a one-dimensional boundary space.
//!
//! The potential equals `q0` outside `[0, X]` and is piecewise constant
//! inside. The Weyl coefficient is evaluated without discretization: the
//! decaying solution `e^{−κ(x−X)}`, `κ = √(q0−λ)`, is carried inward through
//! the pieces by exact transfer matrices. Hilbert-space quantities (state
//! vectors, inner products, resolvents) live on a uniform grid on `[0, R]`
//! with trapezoid weights and second-order finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_tridiagonal, CMat, CVec, C, ZERO};
use crate::models::BoundaryParameter;
use crate::triple::{ExtendedState, TripleModel, WeylValue, NEAR_SPECTRUM_REL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilePiece {
    pub start: f64,
    pub end: f64,
    /// Absolute potential value on [start, end).
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    pub dx: f64,
    /// Truncation radius measured beyond the end of the profile.
    pub tail: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { dx: 1e-3, tail: 40.0 }
    }
}

#[derive(Debug, Clone)]
pub struct HalfLineModel {
    q0: f64,
    pieces: Vec<ProfilePiece>,
    /// intervals covering [0, X] in order, gaps filled with q0
    segments: Vec<ProfilePiece>,
    support_end: f64,
    dx: f64,
    samples: usize,
}

/// (f, f′) at some point, stored as `value · exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
struct ScaledState {
    f: C,
    df: C,
    log_scale: C,
}

impl ScaledState {
    fn normalized(mut self) -> Self {
        let r = self.f.norm().max(self.df.norm());
        if r > 0.0 && r.is_finite() {
            self.f /= r;
            self.df /= r;
            self.log_scale += r.ln();
        }
        self
    }
}

fn principal_sqrt(z: C) -> C {
    let r = z.sqrt();
    if r.re < 0.0 {
        -r
    } else {
        r
    }
}

/// expm1(w)/w, accurate near zero.
fn expm1_ratio(w: C) -> C {
    if w.norm() < 1e-3 {
        C::new(1.0, 0.0) + w / 2.0 + w * w / 6.0 + w * w * w / 24.0
    } else {
        (w.exp() - 1.0) / w
    }
}

/// Carries (f, f′) from the right end b of a constant piece to b + s (s ≤ 0)
/// for f″ = k²f.
fn transfer(state: ScaledState, k2: C, s: f64) -> ScaledState {
    if s == 0.0 {
        return state;
    }
    let k = principal_sqrt(k2);
    let z = k * s;
    let e2 = (z * 2.0).exp();
    let g = expm1_ratio(z * 2.0);
    let half = (C::new(1.0, 0.0) + e2) / 2.0;
    ScaledState {
        f: state.f * half + state.df * g * s,
        df: state.f * k2 * g * s + state.df * half,
        log_scale: state.log_scale - z,
    }
    .normalized()
}

pub fn build_halfline_model(q0: f64, pieces: &[ProfilePiece], quadrature: Quadrature) -> Result<HalfLineModel> {
    if !q0.is_finite() {
        return Err(Error::BadProfile(format!("background potential is not finite: {q0}")));
    }
    let mut sorted = pieces.to_vec();
    for p in &sorted {
        if !(p.start.is_finite() && p.end.is_finite() && p.value.is_finite()) {
            return Err(Error::BadProfile(format!("non-finite piece {p:?}")));
        }
        if p.start < 0.0 || p.end <= p.start {
            return Err(Error::BadProfile(format!("piece must satisfy 0 <= start < end: {p:?}")));
        }
    }
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    for w in sorted.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::BadProfile(format!("overlapping pieces {:?} and {:?}", w[0], w[1])));
        }
    }
    if !(quadrature.dx > 0.0 && quadrature.dx.is_finite() && quadrature.tail > 0.0 && quadrature.tail.is_finite()) {
        return Err(Error::BadGrid(format!("quadrature needs positive dx and tail: {quadrature:?}")));
    }
    let support_end = sorted.last().map(|p| p.end).unwrap_or(0.0);
    let mut segments = Vec::new();
    let mut at = 0.0;
    for p in &sorted {
        if p.start > at {
            segments.push(ProfilePiece { start: at, end: p.start, value: q0 });
        }
        segments.push(*p);
        at = p.end;
    }
    let radius = support_end + quadrature.tail;
    let samples = (radius / quadrature.dx).round() as usize;
    if samples < 4 {
        return Err(Error::BadGrid("quadrature grid has fewer than 4 points".into()));
    }
    Ok(HalfLineModel {
        q0,
        pieces: sorted,
        segments,
        support_end,
        dx: radius / samples as f64,
        samples,
    })
}

/// The free half-line with constant potential q0.
pub fn free_halfline(q0: f64) -> HalfLineModel {
    build_halfline_model(q0, &[], Quadrature::default()).expect("finite background")
}

impl HalfLineModel {
    pub fn background(&self) -> f64 {
        self.q0
    }

    pub fn pieces(&self) -> &[ProfilePiece] {
        &self.pieces
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Sample points x_i = i·dx, i < state_dim; u(R) = 0 is implied.
    pub fn grid_point(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| s.start <= x && x < s.end)
            .map(|s| s.value)
            .unwrap_or(self.q0)
    }

    fn min_potential(&self) -> f64 {
        self.pieces.iter().map(|p| p.value).fold(self.q0, f64::min)
    }

    fn kappa(&self, lambda: C) -> C {
        principal_sqrt(C::new(self.q0, 0.0) - lambda)
    }

    fn check_lambda(&self, lambda: C) -> Result<()> {
        let tol = NEAR_SPECTRUM_REL * self.spectral_scale();
        if lambda.im.abs() <= tol && lambda.re >= self.q0 - tol {
            return Err(Error::SingularSolve { lambda, distance: (self.q0 - lambda.re).max(0.0) });
        }
        Ok(())
    }

    /// States at the segment breakpoints, from X down to 0; entry i is the
    /// state at `segments[i].end` (last entry: the state at 0).
    fn march(&self, lambda: C) -> (Vec<ScaledState>, ScaledState) {
        let kappa = self.kappa(lambda);
        let mut state = ScaledState { f: C::new(1.0, 0.0), df: -kappa, log_scale: ZERO };
        let mut right_ends = vec![state; self.segments.len()];
        for (i, seg) in self.segments.iter().enumerate().rev() {
            right_ends[i] = state;
            state = transfer(state, C::new(seg.value, 0.0) - lambda, seg.start - seg.end);
        }
        (right_ends, state)
    }

    /// (f(0), f′(0)) of the decaying solution, up to a positive factor for
    /// real λ.
    fn boundary_values(&self, lambda: C) -> (C, C) {
        let (_, s0) = self.march(lambda);
        (s0.f, s0.df)
    }

    /// Decaying solution sampled at the grid, normalized so that −f′(0) = 1.
    fn decaying_samples(&self, lambda: C) -> Result<CVec> {
        let (right_ends, s0) = self.march(lambda);
        let tol = NEAR_SPECTRUM_REL * (1.0 + self.kappa(lambda).norm());
        if s0.df.norm() <= tol * s0.f.norm() {
            return Err(Error::SingularSolve { lambda, distance: s0.df.norm() / s0.f.norm().max(f64::MIN_POSITIVE) });
        }
        let kappa = self.kappa(lambda);
        let scale = -s0.df;
        let mut out = CVec::zeros(self.samples);
        for i in 0..self.samples {
            let x = self.grid_point(i);
            let st = if x >= self.support_end {
                ScaledState { f: C::new(1.0, 0.0), df: -kappa, log_scale: -kappa * (x - self.support_end) }
            } else {
                let seg = self.segments.iter().position(|s| x < s.end).expect("x inside the support");
                let s = &self.segments[seg];
                transfer(right_ends[seg], C::new(s.value, 0.0) - lambda, x - s.end)
            };
            out[i] = st.f * (st.log_scale - s0.log_scale).exp() / scale;
        }
        Ok(out)
    }

    fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Solves (−d² + q − λ)u = f on the grid with −u′(0) = b·u(0), u(R) = 0.
    fn robin_fd(&self, b: f64, lambda: C, f: &CVec) -> Result<CVec> {
        let n = self.samples;
        if f.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.len() });
        }
        let inv = 1.0 / (self.dx * self.dx);
        let mut sub = vec![C::new(-inv, 0.0); n];
        let mut sup = vec![C::new(-inv, 0.0); n];
        let diag: Vec<C> = (0..n)
            .map(|i| C::new(2.0 * inv + self.potential(self.grid_point(i)), 0.0) - lambda)
            .collect();
        let mut diag = diag;
        sup[0] = C::new(-2.0 * inv, 0.0);
        diag[0] -= 2.0 * b / self.dx;
        sub[0] = ZERO;
        sup[n - 1] = ZERO;
        let scale = 2.0 * inv + self.spectral_scale();
        solve_tridiagonal(&sub, &diag, &sup, f.as_slice(), scale)
            .map(CVec::from_vec)
            .ok_or(Error::SingularSolve { lambda, distance: 0.0 })
    }

    /// Lowest λ < q0 with D(λ) = 0, where D is built from (f(0), f′(0)) of
    /// the decaying solution; q0 when there is none.
    fn lowest_root(&self, b_plus: f64, det: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let kmax = (self.q0 - self.min_potential() + b_plus * b_plus + 1.0).sqrt();
        let eval = |kappa: f64| {
            let (f0, df0) = self.boundary_values(C::new(self.q0 - kappa * kappa, 0.0));
            det(f0.re, df0.re)
        };
        // dense linear scan plus geometric refinement towards κ = 0
        let mut grid: Vec<f64> = (0..=2000).map(|i| kmax * (1.0 - i as f64 / 2000.0)).collect();
        grid.pop();
        let mut k = kmax / 2000.0;
        while k > 1e-8 {
            k *= 0.7;
            grid.push(k);
        }
        let mut prev_k = grid[0];
        let mut prev = eval(prev_k);
        for &k in &grid[1..] {
            let v = eval(k);
            if v == 0.0 {
                return Ok(self.q0 - k * k);
            }
            if v.signum() != prev.signum() {
                let (mut hi, mut lo) = (prev_k, k);
                let mut f_hi = prev;
                for _ in 0..200 {
                    let mid = 0.5 * (hi + lo);
                    if mid == hi || mid == lo {
                        break;
                    }
                    let fm = eval(mid);
                    if fm.signum() == f_hi.signum() {
                        hi = mid;
                        f_hi = fm;
                    } else {
                        lo = mid;
                    }
                }
                let root = 0.5 * (hi + lo);
                return Ok(self.q0 - root * root);
            }
            prev_k = k;
            prev = v;
        }
        Ok(self.q0)
    }

    fn scalar_b(&self, b: &BoundaryParameter) -> Result<f64> {
        if b.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: b.dim() });
        }
        Ok(b.matrix()[(0, 0)].re)
    }
}

impl TripleModel for HalfLineModel {
    fn state_dim(&self) -> usize {
        self.samples
    }

    fn boundary_dim(&self) -> usize {
        1
    }

    fn inner_state(&self, f: &CVec, g: &CVec) -> C {
        f.iter()
            .zip(g.iter())
            .enumerate()
            .map(|(i, (a, b))| a * b.conj() * self.trapezoid_weight(i))
            .sum()
    }

    fn inner_boundary(&self, a: &CVec, b: &CVec) -> C {
        a[0] * b[0].conj()
    }

    fn apply_t(&self, u: &ExtendedState) -> CVec {
        let n = self.samples;
        let f = &u.interior;
        let flux = u.boundary[0];
        let inv = 1.0 / (self.dx * self.dx);
        CVec::from_iterator(
            n,
            (0..n).map(|i| {
                let left = if i == 0 { f[1] + flux * (2.0 * self.dx) } else { f[i - 1] };
                let right = if i + 1 < n { f[i + 1] } else { ZERO };
                -(right - f[i] * 2.0 + left) * inv + f[i] * self.potential(self.grid_point(i))
            }),
        )
    }

    fn trace0(&self, u: &ExtendedState) -> CVec {
        CVec::from_element(1, u.boundary[0])
    }

    fn trace1(&self, u: &ExtendedState) -> CVec {
        CVec::from_element(1, u.interior[0])
    }

    fn min_sigma_a0(&self) -> f64 {
        if self.pieces.is_empty() {
            return self.q0;
        }
        self.lowest_root(0.0, |_, df0| -df0).unwrap_or(f64::NAN)
    }

    fn spectral_scale(&self) -> f64 {
        1.0 + self.q0.abs() + self.pieces.iter().map(|p| p.value.abs()).fold(0.0, f64::max)
    }

    fn operator_scale(&self) -> f64 {
        4.0 / (self.dx * self.dx) + self.spectral_scale()
    }

    fn gamma_field(&self, lambda: C, phi: &CVec) -> Result<ExtendedState> {
        self.check_lambda(lambda)?;
        let samples = self.decaying_samples(lambda)?;
        Ok(ExtendedState::new(samples * phi[0], CVec::from_element(1, phi[0])))
    }

    fn weyl(&self, lambda: C) -> Result<WeylValue> {
        self.check_lambda(lambda)?;
        let (f0, df0) = self.boundary_values(lambda);
        let tol = NEAR_SPECTRUM_REL * (1.0 + self.kappa(lambda).norm());
        if df0.norm() <= tol * f0.norm() {
            return Err(Error::SingularSolve { lambda, distance: df0.norm() / f0.norm().max(f64::MIN_POSITIVE) });
        }
        Ok(WeylValue { lambda, matrix: CMat::from_element(1, 1, f0 / -df0) })
    }

    fn resolvent_a0_state(&self, lambda: C, f: &CVec) -> Result<ExtendedState> {
        self.check_lambda(lambda)?;
        let u = self.robin_fd(0.0, lambda, f)?;
        Ok(ExtendedState::new(u, CVec::zeros(1)))
    }

    fn robin_resolvent(&self, b: &BoundaryParameter, lambda: C, f: &CVec) -> Result<CVec> {
        let b = self.scalar_b(b)?;
        self.robin_fd(b, lambda, f)
    }

    fn min_sigma_robin(&self, b: &BoundaryParameter) -> Result<f64> {
        let b = self.scalar_b(b)?;
        // −f′(0) = b f(0)
        self.lowest_root(b.max(0.0), |f0, df0| -df0 - b * f0)
    }

    fn min_sigma_dirichlet(&self) -> Result<f64> {
        self.lowest_root(0.0, |f0, _| f0)
    }
}
