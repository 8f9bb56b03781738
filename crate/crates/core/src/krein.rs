//! Krein-type resolvent formula for A_[B] and the self-adjointness checklist.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{general_eigenvalues, hermitian_defect, hermitian_eigh, smallest_singular_value, spectral_norm, CMat, CVec, C};
use crate::models::{BoundaryParameter, HERMITIAN_TOL};
use crate::triple::{gamma_adjoint, TripleModel};

/// Distance from 1 to σ(BM(λ)) below which condition (ii) fails.
pub const KREIN_EIG_TOL: f64 = 1e-8;

fn check_state(model: &(impl TripleModel + ?Sized), f: &CVec) -> Result<()> {
    if f.len() != model.state_dim() {
        return Err(Error::DimensionMismatch { expected: model.state_dim(), got: f.len() });
    }
    Ok(())
}

/// (A₀ − λ)⁻¹ f.
pub fn resolvent_a0(model: &(impl TripleModel + ?Sized), lambda: C, f: &CVec) -> Result<CVec> {
    check_state(model, f)?;
    Ok(model.resolvent_a0_state(lambda, f)?.interior)
}

/// (A₀ − λ)⁻¹f + γ(λ)(I − BM(λ))⁻¹Bγ(λ̄)*f.
pub fn krein_resolvent(model: &(impl TripleModel + ?Sized), b: &BoundaryParameter, lambda: C, f: &CVec) -> Result<CVec> {
    check_state(model, f)?;
    if b.dim() != model.boundary_dim() {
        return Err(Error::DimensionMismatch { expected: model.boundary_dim(), got: b.dim() });
    }
    let base = resolvent_a0(model, lambda, f)?;
    let m = model.weyl(lambda)?.matrix;
    let bm = b.matrix() * &m;
    let n = bm.nrows();
    let block = CMat::identity(n, n) - &bm;
    let sigma_min = smallest_singular_value(&block);
    if sigma_min < 1e-12 * (1.0 + spectral_norm(&bm)) {
        return Err(Error::SingularKreinBlock { lambda, sigma_min });
    }
    let v = gamma_adjoint(model, lambda.conj(), f)?;
    let rhs = b.matrix() * v;
    let w = block.lu().solve(&rhs).ok_or(Error::SingularKreinBlock { lambda, sigma_min })?;
    let correction = model.gamma_field(lambda, &w)?.interior;
    Ok(base + correction)
}

/// B = B₊ − B₋ with B₊, B₋ ⪰ 0 and B₊B₋ = 0.
pub fn split_pm(b: &BoundaryParameter) -> Result<(CMat, CMat)> {
    split_pm_matrix(b.matrix())
}

pub fn split_pm_matrix(b: &CMat) -> Result<(CMat, CMat)> {
    let scale = b.norm().max(f64::MIN_POSITIVE);
    let defect = hermitian_defect(b);
    if defect > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let n = b.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || b[(i, j)].norm() == 0.0));
    if diagonal {
        let plus = CMat::from_fn(n, n, |i, j| if i == j { C::new(b[(i, i)].re.max(0.0), 0.0) } else { C::default() });
        let minus = CMat::from_fn(n, n, |i, j| if i == j { C::new((-b[(i, i)].re).max(0.0), 0.0) } else { C::default() });
        return Ok((plus, minus));
    }
    let (vals, vecs) = hermitian_eigh(b);
    let part = |sign: f64| {
        let d = CVec::from_iterator(n, vals.iter().map(|v| C::new((sign * v).max(0.0), 0.0)));
        let p = &vecs * CMat::from_diagonal(&d) * vecs.adjoint();
        (&p + p.adjoint()) * C::new(0.5, 0.0)
    };
    Ok((part(1.0), part(-1.0)))
}

/// ‖B₊‖ = max(max σ(B), 0).
pub fn positive_part_norm(b: &BoundaryParameter) -> f64 {
    b.upper_bound().max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisEntry {
    pub condition: String,
    pub verdict: Verdict,
    pub witness: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub entries: Vec<HypothesisEntry>,
    /// No entry failed.
    pub all_pass: bool,
}

impl HypothesisReport {
    /// Smallest reported distance from 1 to σ(BM(λ)) over the supplied λ.
    pub fn min_distance(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.witness.get("distance").and_then(Value::as_f64))
            .reduce(f64::min)
    }
}

/// One conjugate pair ±i(1 + spectral scale) and one real point below min σ(A₀).
pub fn default_hypothesis_lambdas(model: &(impl TripleModel + ?Sized)) -> Vec<C> {
    let rho = model.spectral_scale();
    vec![
        C::new(0.0, 1.0 + rho),
        C::new(0.0, -(1.0 + rho)),
        C::new(model.min_sigma_a0() - 1.0, 0.0),
    ]
}

pub fn check_selfadjoint_hypotheses(
    model: &(impl TripleModel + ?Sized),
    b: &BoundaryParameter,
    lambdas: &[C],
) -> HypothesisReport {
    let mut entries = Vec::new();
    let defect = hermitian_defect(b.matrix());
    entries.push(HypothesisEntry {
        condition: "(i) B is self-adjoint".into(),
        verdict: if defect <= HERMITIAN_TOL { Verdict::Pass } else { Verdict::Fail },
        witness: json!({ "hermitian_defect": defect }),
    });
    for &lambda in lambdas {
        let condition = "(ii) 1 is in the resolvent set of B M(lambda)".to_string();
        let entry = match model.weyl(lambda).and_then(|m| general_eigenvalues(&(b.matrix() * m.matrix))) {
            Ok(eigs) => {
                let distance = eigs.iter().map(|e| (e - C::new(1.0, 0.0)).norm()).fold(f64::INFINITY, f64::min);
                HypothesisEntry {
                    condition,
                    verdict: if distance > KREIN_EIG_TOL { Verdict::Pass } else { Verdict::Fail },
                    witness: json!({ "lambda_re": lambda.re, "lambda_im": lambda.im, "distance": distance }),
                }
            }
            Err(e) => HypothesisEntry {
                condition,
                verdict: Verdict::Fail,
                witness: json!({ "lambda_re": lambda.re, "lambda_im": lambda.im, "error": e.to_string() }),
            },
        };
        entries.push(entry);
    }
    let finite = "vacuous: finite-dimensional boundary space, ran Γ₀ is the whole boundary space";
    entries.push(HypothesisEntry {
        condition: "(iii) range condition for B on ran Γ₀".into(),
        verdict: Verdict::Vacuous,
        witness: json!({ "reason": finite }),
    });
    entries.push(HypothesisEntry {
        condition: "(iv) range condition on ran Γ₁".into(),
        verdict: Verdict::Vacuous,
        witness: json!({ "reason": finite }),
    });
    entries.push(HypothesisEntry {
        condition: "(v) ran Γ₀ condition".into(),
        verdict: Verdict::Vacuous,
        witness: json!({ "reason": finite }),
    });
    let a1 = model.dirichlet_is_hermitian();
    entries.push(HypothesisEntry {
        condition: "(v) alternative: A1 is self-adjoint".into(),
        verdict: if a1 { Verdict::Pass } else { Verdict::Fail },
        witness: json!({ "dirichlet_hermitian": a1 }),
    });
    let all_pass = entries.iter().all(|e| e.verdict != Verdict::Fail);
    HypothesisReport { entries, all_pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn diagonal_split() {
        let b = BoundaryParameter::local(vec![2.0, -3.0]).unwrap();
        let (p, m) = split_pm(&b).unwrap();
        assert_eq!(p, CMat::from_diagonal(&CVec::from_vec(vec![c(2.0), c(0.0)])));
        assert_eq!(m, CMat::from_diagonal(&CVec::from_vec(vec![c(0.0), c(3.0)])));
    }

    #[test]
    fn nonpositive_split() {
        let b = CMat::from_row_slice(2, 2, &[c(-2.0), c(1.0), c(1.0), c(-2.0)]);
        let (p, m) = split_pm_matrix(&b).unwrap();
        assert!(p.norm() < 1e-14);
        assert!((m + &b).norm() < 1e-14);
    }

    #[test]
    fn split_rejects_non_hermitian() {
        let b = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(matches!(split_pm_matrix(&b), Err(Error::NotHermitian { .. })));
    }
}
