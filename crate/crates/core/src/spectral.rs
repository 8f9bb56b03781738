//! Ground-state eigenvalues and coupling sweeps ω ↦ min σ(A_[ωB]).

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::BoundCertificate;
use crate::error::{Error, Result};
use crate::krein::krein_resolvent;
use crate::linalg::{hermitian_defect, hermitian_eigenvalues, lanczos_largest, CMat, C};
use crate::models::{BoundaryParameter, DENSE_LIMIT};
use crate::random::{random_cvec, rng};
use crate::triple::TripleModel;

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig(h: &CMat) -> Result<f64> {
    min_eig_with_limit(h, DENSE_LIMIT)
}

/// [`min_eig`] with an explicit dense/iterative cutoff.
pub fn min_eig_with_limit(h: &CMat, dense_limit: usize) -> Result<f64> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n.max(1), got: h.ncols() });
    }
    let scale = h.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
    let defect = hermitian_defect(h);
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian { defect: defect / scale });
    }
    if n <= dense_limit {
        return Ok(hermitian_eigenvalues(h)[0]);
    }
    // real symmetric form: Re ⊗ I + Im ⊗ J has the spectrum of h doubled
    let real = h.iter().all(|z| z.im == 0.0);
    let s = if real {
        DMatrix::from_fn(n, n, |i, j| 0.5 * (h[(i, j)].re + h[(j, i)].re))
    } else {
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let z = 0.5 * (h[(i % n, j % n)] + h[(j % n, i % n)].conj());
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        })
    };
    shift_invert_bottom(&s)
}

fn shift_invert_bottom(s: &DMatrix<f64>) -> Result<f64> {
    let n = s.nrows();
    let off = |i: usize| (0..n).filter(|&j| j != i).map(|j| s[(i, j)].abs()).sum::<f64>();
    let gershgorin = (0..n).map(|i| s[(i, i)] - off(i)).fold(f64::INFINITY, f64::min);
    let radius = (0..n).map(|i| s[(i, i)].abs() + off(i)).fold(0.0, f64::max);
    let run = |sigma: f64, tol: f64| -> Result<f64> {
        let shifted = s - DMatrix::identity(n, n) * sigma;
        let chol = shifted
            .cholesky()
            .ok_or_else(|| Error::NoConvergence(format!("shift {sigma} is not below the spectrum")))?;
        let theta = lanczos_largest(
            n,
            |x| chol.solve(&nalgebra::DVector::from_column_slice(x)).as_slice().to_vec(),
            300,
            tol,
        )?;
        Ok(sigma + 1.0 / theta)
    };
    let sigma = gershgorin - 1e-3 * radius.max(f64::MIN_POSITIVE);
    let est = run(sigma, 1e-6)?;
    // second shift just below the estimate separates the bottom eigenvalue
    let gap = est - sigma;
    let close = est - (1e-3 * gap).max(1e-9 * est.abs());
    match run(close, 1e-13) {
        Ok(v) => Ok(v),
        Err(_) => run(est - 0.1 * gap, 1e-13).or_else(|_| run(sigma, 1e-13)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub min_sigma: f64,
    pub certificate: BoundCertificate,
    /// min_sigma − certificate value
    pub slack: f64,
}

/// For each ω (sorted ascending): min σ(A_[ωB]) and `certify(ωB)`.
pub fn spectrum_sweep<M, F>(model: &M, b: &BoundaryParameter, omegas: &[f64], certify: F) -> Result<Vec<SweepRow>>
where
    M: TripleModel + ?Sized,
    F: Fn(&BoundaryParameter) -> Result<BoundCertificate> + Sync,
{
    if let Some(w) = omegas.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(Error::BadSamples(format!("omega must be finite and non-negative, got {w}")));
    }
    let mut sorted = omegas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&omega| {
            let bw = b.scaled(omega);
            let min_sigma = model.min_sigma_robin(&bw)?;
            let certificate = certify(&bw)?;
            let slack = min_sigma - certificate.value;
            Ok(SweepRow { omega, min_sigma, certificate, slack })
        })
        .collect()
}

/// CSV with columns omega, min_sigma, certificate, slack.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("omega,min_sigma,certificate,slack\n");
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.omega, r.min_sigma, r.certificate.value, r.slack
        ));
    }
    out
}

/// max over λ and ten random f of ‖Krein − direct‖/‖direct‖.
pub fn resolvent_consistency<M: TripleModel + ?Sized>(
    model: &M,
    b: &BoundaryParameter,
    lambdas: &[C],
    seed: u64,
) -> Result<f64> {
    let per_lambda: Vec<f64> = lambdas
        .par_iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let mut r = rng(seed.wrapping_add(k as u64));
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let f = random_cvec(&mut r, model.state_dim());
                let direct = model.robin_resolvent(b, lambda, &f)?;
                let krein = krein_resolvent(model, b, lambda, &f)?;
                worst = worst.max((krein - &direct).norm() / direct.norm());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per_lambda.into_iter().fold(0.0, f64::max))
}
