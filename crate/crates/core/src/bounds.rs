//! Weyl-function decay envelopes and lower-bound certificates for min σ(A_[B]).
//!
//! Three routes produce a certified value:
//! - decay: ‖M(λ)‖ ≤ C/(μ−λ)^α gives min σ(A_[B]) ≥ μ − (C‖B₊‖)^{1/α};
//! - negativity: B ⪯ 0 gives min σ(A_[B]) ≥ min σ(A₀);
//! - form: essinf a − β(E/‖B₊‖)‖B₊‖ with the trace constant β(ε).

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::krein::positive_part_norm;
use crate::linalg::real_symmetric_eigenvalues;
use crate::models::{BoundaryParameter, DiscreteEllipticModel, DENSE_LIMIT};
use crate::triple::TripleModel;

/// max σ(B) above which B does not count as non-positive.
pub const NEGATIVITY_TOL: f64 = 1e-12;
pub const MIN_DECAY_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySample {
    pub lambda: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayEnvelope {
    pub mu: f64,
    pub c: f64,
    pub alpha: f64,
    /// [λ_lo, λ_hi] covered by the samples.
    pub window: [f64; 2],
    pub samples: Vec<DecaySample>,
    /// −(least-squares slope) before clamping.
    pub raw_alpha: f64,
    /// Raw slope exceeded 1 and α was clamped.
    pub clamped: bool,
    /// ‖M(λ)‖ is non-decreasing in λ over the samples.
    pub monotone: bool,
}

impl DecayEnvelope {
    /// Validates an explicit envelope against its samples.
    pub fn new(mu: f64, c: f64, alpha: f64, samples: Vec<DecaySample>) -> Result<Self> {
        let samples = validated_samples(samples, mu, 1)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::BadSamples(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::BadSamples(format!("C must be positive, got {c}")));
        }
        let env = DecayEnvelope {
            mu,
            c,
            alpha,
            window: [samples[0].lambda, samples[samples.len() - 1].lambda],
            monotone: is_monotone(&samples),
            samples,
            raw_alpha: alpha,
            clamped: false,
        };
        if let Some(s) = env.samples.iter().find(|s| !env.satisfied(s)) {
            return Err(Error::BadSamples(format!(
                "envelope violated at lambda = {}: norm {} > {}",
                s.lambda,
                s.norm,
                env.bound_at(s.lambda)
            )));
        }
        Ok(env)
    }

    /// C/(μ−λ)^α.
    pub fn bound_at(&self, lambda: f64) -> f64 {
        self.c / (self.mu - lambda).powf(self.alpha)
    }

    pub fn satisfied(&self, s: &DecaySample) -> bool {
        s.norm <= self.bound_at(s.lambda)
    }

    pub fn covers(&self, lambda: f64) -> bool {
        self.window[0] <= lambda && lambda <= self.window[1]
    }

    /// CSV with columns lambda, norm_M, bound_value, satisfied.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("lambda,norm_M,bound_value,satisfied\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{}\n",
                s.lambda,
                s.norm,
                self.bound_at(s.lambda),
                self.satisfied(s)
            ));
        }
        out
    }
}

fn validated_samples(mut samples: Vec<DecaySample>, mu: f64, min: usize) -> Result<Vec<DecaySample>> {
    if !mu.is_finite() {
        return Err(Error::BadSamples(format!("mu is not finite: {mu}")));
    }
    if samples.len() < min {
        return Err(Error::BadSamples(format!("need at least {min} samples, got {}", samples.len())));
    }
    for s in &samples {
        if !s.lambda.is_finite() || s.lambda >= mu {
            return Err(Error::BadSamples(format!("sample lambda {} is not below mu = {mu}", s.lambda)));
        }
        if !(s.norm > 0.0 && s.norm.is_finite()) {
            return Err(Error::BadSamples(format!("non-positive norm {} at lambda {}", s.norm, s.lambda)));
        }
    }
    samples.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(samples)
}

fn is_monotone(sorted: &[DecaySample]) -> bool {
    sorted.windows(2).all(|w| w[1].norm >= w[0].norm * (1.0 - 1e-12))
}

/// Least-squares slope and intercept of y against x.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits ln‖M‖ against ln(μ−λ), then takes the smallest C for which every
/// sample satisfies the envelope.
pub fn decay_fit(samples: &[(f64, f64)], mu: f64) -> Result<DecayEnvelope> {
    let samples = validated_samples(
        samples.iter().map(|&(lambda, norm)| DecaySample { lambda, norm }).collect(),
        mu,
        MIN_DECAY_SAMPLES,
    )?;
    let x: Vec<f64> = samples.iter().map(|s| (mu - s.lambda).ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.norm.ln()).collect();
    let (slope, _) = least_squares(&x, &y);
    let raw_alpha = -slope;
    if !(raw_alpha > 0.0) {
        return Err(Error::BadSamples(format!("samples do not decay (fitted alpha {raw_alpha})")));
    }
    let clamped = raw_alpha > 1.0 + 1e-9;
    let alpha = raw_alpha.min(1.0);
    let mut c = samples
        .iter()
        .map(|s| s.norm * (mu - s.lambda).powf(alpha))
        .fold(0.0, f64::max)
        * (1.0 + 4.0 * f64::EPSILON);
    let mut env = DecayEnvelope {
        mu,
        c,
        alpha,
        window: [samples[0].lambda, samples[samples.len() - 1].lambda],
        monotone: is_monotone(&samples),
        samples,
        raw_alpha,
        clamped,
    };
    while env.samples.iter().any(|s| !env.satisfied(s)) {
        c *= 1.0 + 4.0 * f64::EPSILON;
        env.c = c;
    }
    Ok(env)
}

/// ‖M(λ)‖ at each λ, evaluated in parallel and returned sorted by λ.
pub fn sample_weyl_norms(model: &(impl TripleModel + ?Sized), lambdas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&l| model.weyl_norm(l).map(|n| (l, n)))
        .collect()
}

/// `count` points μ − d with d spaced geometrically in [d_min, d_max].
pub fn geometric_window(mu: f64, d_min: f64, d_max: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    let r = (d_max / d_min).ln();
    (0..count)
        .map(|k| mu - d_min * (r * k as f64 / (count - 1) as f64).exp())
        .rev()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Decay,
    Negativity,
    Form,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "route", rename_all = "lowercase")]
pub enum Provenance {
    Decay {
        mu: f64,
        c: f64,
        alpha: f64,
        b_plus_norm: f64,
        window: [f64; 2],
        /// μ − (C‖B₊‖)^{1/α}, the point where ‖B₊‖·envelope = 1
        critical_lambda: f64,
        /// the critical point lies outside the validated window
        heuristic: bool,
    },
    Negativity {
        max_eig_b: f64,
        min_sigma_a0: f64,
    },
    Form {
        ellipticity: f64,
        eps: f64,
        beta: f64,
        essinf_a: f64,
        b_plus_norm: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub value: f64,
    pub route: Route,
    pub provenance: Provenance,
}

/// x^{1/α}, exact for α = 1/2 and α = 1.
fn inverse_power(x: f64, alpha: f64) -> f64 {
    if alpha == 0.5 {
        x * x
    } else if alpha == 1.0 {
        x
    } else {
        x.powf(1.0 / alpha)
    }
}

/// μ − (C‖B₊‖)^{1/α}. With B₊ = 0 the negativity route applies; its value is
/// `a0_bottom` when known and μ otherwise.
pub fn lower_bound_decay(env: &DecayEnvelope, b: &BoundaryParameter, a0_bottom: Option<f64>) -> BoundCertificate {
    let bp = positive_part_norm(b);
    if bp == 0.0 {
        let bottom = a0_bottom.unwrap_or(env.mu);
        return BoundCertificate {
            value: bottom,
            route: Route::Negativity,
            provenance: Provenance::Negativity { max_eig_b: b.upper_bound(), min_sigma_a0: bottom },
        };
    }
    let value = env.mu - inverse_power(env.c * bp, env.alpha);
    BoundCertificate {
        value,
        route: Route::Decay,
        provenance: Provenance::Decay {
            mu: env.mu,
            c: env.c,
            alpha: env.alpha,
            b_plus_norm: bp,
            window: env.window,
            critical_lambda: value,
            heuristic: !env.covers(value),
        },
    }
}

/// min σ(A_[B]) ≥ min σ(A₀) for B ⪯ 0.
pub fn negative_b_guarantee(model: &(impl TripleModel + ?Sized), b: &BoundaryParameter) -> Result<BoundCertificate> {
    let max_eig = b.upper_bound();
    if max_eig > NEGATIVITY_TOL {
        return Err(Error::NotNegative { max_eig });
    }
    let bottom = model.min_sigma_a0();
    Ok(BoundCertificate {
        value: bottom,
        route: Route::Negativity,
        provenance: Provenance::Negativity { max_eig_b: max_eig, min_sigma_a0: bottom },
    })
}

/// Smallest β with w‖u_∂‖² ≤ ε·uᵀGu + β·m‖u_I‖² for all node vectors u, G the
/// unit-coefficient gradient form. Infinite when ε is too small for the
/// boundary block of εG − w to be positive definite (ε below about h/2).
pub fn trace_constant(model: &DiscreteEllipticModel, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BadSamples(format!("eps must be positive, got {eps}")));
    }
    let (ni, nb) = (model.n_interior(), model.n_boundary());
    if ni > DENSE_LIMIT {
        return Err(Error::Unsupported(format!("trace constant on {ni} interior nodes (limit {DENSE_LIMIT})")));
    }
    let g = model.gradient_form();
    let (int, bnd) = (model.interior_nodes(), model.boundary_nodes());
    let w = model.weight();
    let p_ii = DMatrix::from_fn(ni, ni, |i, j| eps * g.get(int[i], int[j]));
    let p_ib = DMatrix::from_fn(ni, nb, |i, j| eps * g.get(int[i], bnd[j]));
    let p_bb = DMatrix::from_fn(nb, nb, |i, j| eps * g.get(bnd[i], bnd[j]) - if i == j { w } else { 0.0 });
    let Some(chol) = p_bb.cholesky() else {
        return Ok(f64::INFINITY);
    };
    let schur = p_ii - &p_ib * chol.solve(&p_ib.transpose());
    let schur = (&schur + schur.transpose()) * 0.5;
    let smallest = real_symmetric_eigenvalues(&schur)[0];
    Ok((-smallest / model.mass()).max(0.0))
}

/// essinf a − β(E/‖B₊‖)·‖B₊‖, E the discrete form ellipticity.
pub fn form_lower_bound(model: &DiscreteEllipticModel, b: &BoundaryParameter) -> Result<BoundCertificate> {
    let bp = positive_part_norm(b);
    if bp == 0.0 {
        return negative_b_guarantee(model, b);
    }
    let e = model.form_ellipticity();
    if !(e > 0.0) {
        return Err(Error::EllipticityViolation { x: f64::NAN, y: f64::NAN, eig: e });
    }
    let eps = e / bp;
    let beta = trace_constant(model, eps)?;
    let essinf_a = model.essinf_potential();
    Ok(BoundCertificate {
        value: essinf_a - beta * bp,
        route: Route::Form,
        provenance: Provenance::Form { ellipticity: e, eps, beta, essinf_a, b_plus_norm: bp },
    })
}

/// Least-squares slope of ln|min σ| against ln ω over the upper half of the
/// points (indices n/2..n).
pub fn asymptotic_slope(omegas: &[f64], minsigmas: &[f64]) -> Result<f64> {
    if omegas.len() != minsigmas.len() {
        return Err(Error::DimensionMismatch { expected: omegas.len(), got: minsigmas.len() });
    }
    let n = omegas.len();
    if n < 5 {
        return Err(Error::BadSamples(format!("need at least 5 points, got {n}")));
    }
    if omegas.iter().any(|w| !(*w > 0.0)) || omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadSamples("omegas must be positive and increasing".into()));
    }
    let top = n / 2..n;
    if let Some(s) = minsigmas[top.clone()].iter().find(|s| !(**s < 0.0)) {
        return Err(Error::BadSamples(format!("min sigma {s} is not negative in the fit window")));
    }
    let x: Vec<f64> = omegas[top.clone()].iter().map(|w| w.ln()).collect();
    let y: Vec<f64> = minsigmas[top].iter().map(|s| s.abs().ln()).collect();
    Ok(least_squares(&x, &y).0)
}

/// F⁺ = max(0, min σ(A₀) − min σ(A_[ωB])).
pub fn excess_below_bottom(min_sigma_a0: f64, min_sigma: f64) -> f64 {
    (min_sigma_a0 - min_sigma).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(f: impl Fn(f64) -> f64, mu: f64) -> Vec<(f64, f64)> {
        (1..=10).map(|k| {
            let l = mu - 2f64.powi(k);
            (l, f(mu - l))
        }).collect()
    }

    #[test]
    fn exact_square_root_decay() {
        let env = decay_fit(&samples(|d| 1.0 / d.sqrt(), 0.0), 0.0).unwrap();
        assert!((env.alpha - 0.5).abs() < 1e-10);
        assert!((env.c - 1.0).abs() < 1e-10);
        assert!(!env.clamped);
        assert!(env.monotone);
    }

    #[test]
    fn alpha_one_boundary_case() {
        let env = decay_fit(&samples(|d| 3.0 / d, 1.0), 1.0).unwrap();
        assert_eq!(env.alpha, 1.0);
        assert!(!env.clamped);
        assert!((env.c - 3.0).abs() < 1e-10);
    }

    #[test]
    fn steep_decay_is_clamped() {
        let env = decay_fit(&samples(|d| 1.0 / (d * d), 0.0), 0.0).unwrap();
        assert!(env.clamped);
        assert_eq!(env.alpha, 1.0);
        assert!(env.samples.iter().all(|s| env.satisfied(s)));
    }

    #[test]
    fn bad_samples() {
        let mut s = samples(|d| 1.0 / d.sqrt(), 0.0);
        assert!(matches!(decay_fit(&s[..7], 0.0), Err(Error::BadSamples(_))));
        s[3].1 = 0.0;
        assert!(matches!(decay_fit(&s, 0.0), Err(Error::BadSamples(_))));
        let s = samples(|d| 1.0 / d.sqrt(), 0.0);
        assert!(matches!(decay_fit(&s, -3.0), Err(Error::BadSamples(_))));
        let growing = samples(|d| d, 0.0);
        assert!(matches!(decay_fit(&growing, 0.0), Err(Error::BadSamples(_))));
    }

    #[test]
    fn explicit_envelope_is_checked() {
        let s: Vec<DecaySample> = samples(|d| 1.0 / d.sqrt(), 0.0)
            .into_iter()
            .map(|(lambda, norm)| DecaySample { lambda, norm })
            .collect();
        assert!(DecayEnvelope::new(0.0, 1.0, 0.5, s.clone()).is_ok());
        assert!(matches!(DecayEnvelope::new(0.0, 0.9, 0.5, s.clone()), Err(Error::BadSamples(_))));
        assert!(matches!(DecayEnvelope::new(0.0, 1.0, 1.5, s), Err(Error::BadSamples(_))));
    }

    #[test]
    fn decay_certificate_value() {
        let s: Vec<DecaySample> = (1..=8).map(|k| {
            let l = -(4f64.powi(k));
            DecaySample { lambda: l, norm: 1.0 / (-l).sqrt() }
        }).collect();
        let env = DecayEnvelope::new(0.0, 1.0, 0.5, s).unwrap();
        let cert = lower_bound_decay(&env, &BoundaryParameter::scalar(1, 3.0), None);
        assert_eq!(cert.value, -9.0);
        assert_eq!(cert.route, Route::Decay);
        let cert = lower_bound_decay(&env, &BoundaryParameter::scalar(1, -3.0), Some(0.25));
        assert_eq!(cert.route, Route::Negativity);
        assert_eq!(cert.value, 0.25);
    }

    #[test]
    fn slope_rejects_nonnegative() {
        let w = [1.0, 2.0, 4.0, 8.0, 16.0];
        assert!(matches!(asymptotic_slope(&w, &[1.0; 5]), Err(Error::BadSamples(_))));
        let s: Vec<f64> = w.iter().map(|x| -x * x).collect();
        assert!((asymptotic_slope(&w, &s).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_window_is_sorted() {
        let l = geometric_window(0.0, 1e2, 1e4, 9);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
        assert!((l[0] + 1e4).abs() < 1e-8 && (l[8] + 1e2).abs() < 1e-10);
    }
}
