//! Concrete boundary triples: grid-discretized elliptic operators, the
//! half-line Schrödinger operator, and boundary parameters B.

mod boundary;
pub mod discrete;
pub mod grid;
pub mod halfline;

use serde::{Deserialize, Serialize};

pub use boundary::{BoundaryKind, BoundaryParameter, HERMITIAN_TOL};
pub use discrete::{DiscreteTriple, DENSE_LIMIT};
pub use grid::{build_discrete_model, CoeffSpec, Coefficient, CosineField, DiscreteEllipticModel, GridSpec, Shape};
pub use halfline::{build_halfline_model, free_halfline, HalfLineModel, ProfilePiece, Quadrature};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

/// Matrix of A_[B] on the interior unknowns, from eliminating the boundary
/// values in Γ₀u = BΓ₁u.
pub fn assemble_robin(model: &DiscreteTriple, b: &BoundaryParameter) -> Result<CMat> {
    model.robin_matrix(b)
}

/// Declarative boundary parameter, resolved against the boundary nodes of a
/// model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundarySpec {
    /// b·I
    Scalar { value: f64 },
    /// diag(b(x)) over the boundary nodes
    Local { b: Coefficient },
    /// explicit real symmetric matrix (rows)
    Nonlocal { matrix: Vec<Vec<f64>> },
    /// symmetrized Gaussian kernel between boundary nodes
    Gaussian { amplitude: f64, width: f64 },
}

/// Materializes `spec` on boundary nodes at `points`.
pub fn boundary_param(spec: &BoundarySpec, points: &[[f64; 2]]) -> Result<BoundaryParameter> {
    let n = points.len();
    match spec {
        BoundarySpec::Scalar { value } => {
            if !value.is_finite() {
                return Err(Error::BadSamples(format!("scalar boundary parameter is not finite: {value}")));
            }
            Ok(BoundaryParameter::scalar(n, *value))
        }
        BoundarySpec::Local { b } => BoundaryParameter::local(points.iter().map(|p| b.eval(p[0], p[1])).collect()),
        BoundarySpec::Nonlocal { matrix } => {
            if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, got: matrix.len() });
            }
            if matrix.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::BadSamples("nonlocal boundary matrix has non-finite entries".into()));
            }
            BoundaryParameter::nonlocal(CMat::from_fn(n, n, |i, j| c(matrix[i][j])))
        }
        BoundarySpec::Gaussian { amplitude, width } => BoundaryParameter::gaussian_kernel(points, *amplitude, *width),
    }
}
