use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_defect, hermitian_eigenvalues, CMat};

/// Symmetry tolerance for user-supplied nonlocal parameters.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryKind {
    Scalar { value: f64 },
    Local { b: Vec<f64> },
    Nonlocal,
}

/// The self-adjoint boundary parameter B in Γ₀f = BΓ₁f.
#[derive(Debug, Clone)]
pub struct BoundaryParameter {
    kind: BoundaryKind,
    matrix: CMat,
    upper_bound: f64,
}

impl BoundaryParameter {
    pub fn scalar(dim: usize, value: f64) -> Self {
        BoundaryParameter {
            kind: BoundaryKind::Scalar { value },
            matrix: CMat::from_diagonal_element(dim, dim, c(value)),
            upper_bound: if dim == 0 { f64::NEG_INFINITY } else { value },
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::scalar(dim, 0.0)
    }

    /// Classical Robin coefficient b sampled on the boundary nodes.
    pub fn local(b: Vec<f64>) -> Result<Self> {
        if let Some(bad) = b.iter().find(|v| !v.is_finite()) {
            return Err(Error::BadSamples(format!("local Robin coefficient is not finite: {bad}")));
        }
        let matrix = CMat::from_fn(b.len(), b.len(), |i, j| if i == j { c(b[i]) } else { c(0.0) });
        let upper_bound = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(BoundaryParameter { kind: BoundaryKind::Local { b }, matrix, upper_bound })
    }

    pub fn nonlocal(matrix: CMat) -> Result<Self> {
        let defect = hermitian_defect(&matrix);
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { defect });
        }
        // exact symmetrization once the defect is known to be round-off
        let matrix = (&matrix + matrix.adjoint()) * c(0.5);
        let upper_bound = hermitian_eigenvalues(&matrix).last().copied().unwrap_or(f64::NEG_INFINITY);
        Ok(BoundaryParameter { kind: BoundaryKind::Nonlocal, matrix, upper_bound })
    }

    /// Gaussian interaction kernel between boundary points, symmetrized as
    /// (K + Kᴴ)/2.
    pub fn gaussian_kernel(points: &[[f64; 2]], amplitude: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() {
            return Err(Error::BadSamples("gaussian kernel needs width > 0 and finite amplitude".into()));
        }
        let n = points.len();
        let k = CMat::from_fn(n, n, |i, j| {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            c(amplitude * (-(dx * dx + dy * dy) / (2.0 * width * width)).exp())
        });
        Self::nonlocal((&k + k.adjoint()) * c(0.5))
    }

    pub fn kind(&self) -> &BoundaryKind {
        &self.kind
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// max σ(B).
    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    /// Diagonal entries when B is diagonal (scalar or local).
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        match &self.kind {
            BoundaryKind::Scalar { value } => Some(vec![*value; self.dim()]),
            BoundaryKind::Local { b } => Some(b.clone()),
            BoundaryKind::Nonlocal => {
                let n = self.dim();
                let diag = (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)].norm() == 0.0));
                let real = (0..n).all(|i| self.matrix[(i, i)].im == 0.0);
                (diag && real).then(|| (0..n).map(|i| self.matrix[(i, i)].re).collect())
            }
        }
    }

    /// ωB.
    pub fn scaled(&self, omega: f64) -> Self {
        let kind = match &self.kind {
            BoundaryKind::Scalar { value } => BoundaryKind::Scalar { value: omega * value },
            BoundaryKind::Local { b } => BoundaryKind::Local { b: b.iter().map(|v| omega * v).collect() },
            BoundaryKind::Nonlocal => BoundaryKind::Nonlocal,
        };
        let upper_bound = if omega >= 0.0 {
            omega * self.upper_bound
        } else {
            hermitian_eigenvalues(&(&self.matrix * c(omega))).last().copied().unwrap_or(f64::NEG_INFINITY)
        };
        let upper_bound = if self.dim() == 0 { f64::NEG_INFINITY } else if omega == 0.0 { 0.0 } else { upper_bound };
        BoundaryParameter { kind, matrix: &self.matrix * c(omega), upper_bound }
    }
}
