//! Small dense/sparse linear-algebra kit shared by the models.
//!
//! Dense work goes through `nalgebra`. Grid models large enough that dense
//! factorizations are out of reach use [`SymCsr`] for storage, [`BandLdl`] for
//! shifted solves (the node ordering keeps the bandwidth at one grid column),
//! and [`lanczos_largest`] for extreme eigenvalues.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C = Complex64;
pub type CVec = DVector<C>;
pub type CMat = DMatrix<C>;

pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// ‖H − Hᴴ‖_F / max(‖H‖_F, tiny).
pub fn hermitian_defect(h: &CMat) -> f64 {
    if h.nrows() != h.ncols() {
        return f64::INFINITY;
    }
    let diff = h - h.adjoint();
    diff.norm() / h.norm().max(f64::MIN_POSITIVE)
}

pub fn is_real(h: &CMat) -> bool {
    h.iter().all(|z| z.im == 0.0)
}

pub fn real_part(h: &CMat) -> DMatrix<f64> {
    h.map(|z| z.re)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(c)
}

/// Ascending eigenvalues of a Hermitian matrix (the real path is taken when
/// the imaginary parts vanish).
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = if is_real(h) {
        SymmetricEigen::new(real_part(h)).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect()
    };
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn real_symmetric_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
pub fn hermitian_eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Spectral norm of a general complex matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn smallest_singular_value(m: &CMat) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    m.clone().svd(false, false).singular_values.min()
}

/// Eigenvalues of a general complex square matrix.
pub fn general_eigenvalues(m: &CMat) -> Result<Vec<C>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NoConvergence("complex Schur decomposition".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Symmetric sparse matrix in CSR form; both triangles are stored.
#[derive(Debug, Clone)]
pub struct SymCsr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymCsr {
    /// Builds from (row, col, value) triplets; duplicates are summed. The
    /// caller supplies both (i, j) and (j, i) contributions.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymCsr { n, row_ptr, cols, vals }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(k, _)| k == j).map(|(_, v)| v).unwrap_or(0.0)
    }

    pub fn half_bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn mul_complex(&self, x: &[C]) -> Vec<C> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| x[j] * v).sum())
            .collect()
    }
}

/// Banded symmetric LDLᵀ factorization without pivoting.
///
/// Lower band is stored row-wise: `band[i * (bw + 1) + (bw - (i - j))]` holds
/// entry (i, j) for `i - bw <= j <= i`.
#[derive(Debug, Clone)]
pub struct BandLdl {
    n: usize,
    bw: usize,
    band: Vec<f64>,
    negative_pivots: usize,
    min_abs_pivot: f64,
}

impl BandLdl {
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                band[i * w + (bw - (i - j))] = entry(i, j);
            }
        }
        let scale = band.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut negative_pivots = 0;
        let mut min_abs_pivot = f64::INFINITY;
        // Row-oriented: for each row i compute L_ij for j < i, then d_i.
        let mut tmp = vec![0.0; w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..i {
                let mut s = band[i * w + (bw - (i - j))];
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    // tmp[k - j0] holds L_ik * d_k
                    s -= tmp[k - j0] * band[j * w + (bw - (j - k))];
                }
                tmp[j - j0] = s;
                let dj = band[j * w + bw];
                band[i * w + (bw - (i - j))] = s / dj;
            }
            let mut d = band[i * w + bw];
            for j in j0..i {
                d -= tmp[j - j0] * band[i * w + (bw - (i - j))];
            }
            if !d.is_finite() || d.abs() <= 1e-14 * scale {
                return Err(Error::SingularSolve {
                    lambda: C::new(f64::NAN, 0.0),
                    distance: d.abs(),
                });
            }
            if d < 0.0 {
                negative_pivots += 1;
            }
            min_abs_pivot = min_abs_pivot.min(d.abs());
            band[i * w + bw] = d;
        }
        Ok(BandLdl { n, bw, band, negative_pivots, min_abs_pivot })
    }

    pub fn negative_pivots(&self) -> usize {
        self.negative_pivots
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.min_abs_pivot
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut x = rhs.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for j in i.saturating_sub(bw)..i {
                s -= self.band[i * w + (bw - (i - j))] * x[j];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.band[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                s -= self.band[k * w + (bw - (k - i))] * x[k];
            }
            x[i] = s;
        }
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by Lanczos
/// with full reorthogonalization.
pub fn lanczos_largest(
    n: usize,
    apply: impl Fn(&[f64]) -> Vec<f64>,
    max_iter: usize,
    tol: f64,
) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    // deterministic, generic start vector
    let mut q: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * ((i as f64) * 0.7123).sin()).collect();
    let nq = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|v| *v /= nq);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last = f64::NAN;
    let steps = max_iter.min(n);
    for k in 0..steps {
        let mut r = apply(&basis[k]);
        let a = dot(&r, &basis[k]);
        alphas.push(a);
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&r, b);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let beta = dot(&r, &r).sqrt();
        let m = alphas.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imax, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let resid = (beta * eig.eigenvectors[(m - 1, imax)]).abs();
        if resid <= tol * theta.abs().max(f64::MIN_POSITIVE)
            || beta <= 1e-14 * theta.abs()
            || k + 1 == n
        {
            return Ok(theta);
        }
        if (theta - last).abs() <= 1e-15 * theta.abs() && k > 10 {
            return Ok(theta);
        }
        last = theta;
        betas.push(beta);
        basis.push(r.iter().map(|v| v / beta).collect());
    }
    Err(Error::NoConvergence(format!(
        "Lanczos did not converge in {steps} steps (last Ritz value {last:e})"
    )))
}

/// Solves a complex tridiagonal system with the Thomas algorithm.
/// `sub[i]` couples row i to i-1, `sup[i]` couples row i to i+1.
pub fn solve_tridiagonal(sub: &[C], diag: &[C], sup: &[C], rhs: &[C], scale: f64) -> Option<Vec<C>> {
    let n = diag.len();
    let mut cp = vec![ZERO; n];
    let mut dp = vec![ZERO; n];
    let mut denom = diag[0];
    if denom.norm() <= 1e-14 * scale {
        return None;
    }
    cp[0] = if n > 1 { sup[0] / denom } else { ZERO };
    dp[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * cp[i - 1];
        if denom.norm() <= 1e-14 * scale {
            return None;
        }
        cp[i] = if i + 1 < n { sup[i] / denom } else { ZERO };
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / denom;
    }
    let mut x = vec![ZERO; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Some(x)
}
