//! Finite-dimensional boundary triple built from a symmetric node matrix.
//!
//! Nodes split into interior `I` and boundary `∂`. With the symmetric energy
//! matrix `K`, interior mass `m` and boundary weight `w`:
//!
//! ```text
//!   T u  = (K u)_I / m          (H = interior values, inner product m·⟨·,·⟩)
//!   Γ₀ u = (K u)_∂ / w          (boundary space, inner product w·⟨·,·⟩)
//!   Γ₁ u = u_∂
//! ```
//!
//! Green's identity is then an exact algebraic identity of the block
//! partition. A₀ is the Schur complement of `K` onto the interior, A₁ is
//! `K_II / m`, and `M(λ) = w Σ(λ)⁻¹` with the boundary Schur complement
//! `Σ(λ) = K_∂∂ − K_∂I (K_II − λm)⁻¹ K_I∂`.
//!
//! Models with at most [`DENSE_LIMIT`] interior nodes are handled densely
//! (complex λ allowed). Larger models use banded LDLᵀ solves in the global
//! node ordering and support real λ only.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eigenvalues, lanczos_largest, real_symmetric_eigenvalues, to_complex, BandLdl, CMat, CVec, SymCsr, C,
    ONE, ZERO,
};
use crate::models::BoundaryParameter;
use crate::triple::{ExtendedState, TripleModel, WeylValue, NEAR_SPECTRUM_REL};

/// Interior dimension up to which dense factorizations are used.
pub const DENSE_LIMIT: usize = 2000;

const LANCZOS_STEPS: usize = 300;
const LANCZOS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Interior(usize),
    Boundary(usize),
}

#[derive(Debug)]
struct DenseBlocks {
    k_ii: DMatrix<f64>,
    k_ib: DMatrix<f64>,
    k_bb: DMatrix<f64>,
    a0_eigs: Vec<f64>,
    a1_eigs: Vec<f64>,
}

#[derive(Debug)]
pub struct DiscreteTriple {
    k: SymCsr,
    slots: Vec<Slot>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    mass: f64,
    weight: f64,
    half_bandwidth: usize,
    dense_limit: usize,
    dense: OnceLock<Result<DenseBlocks>>,
    min_a0: OnceLock<f64>,
}

/// Which boundary closure a banded solve uses.
#[derive(Clone, Copy)]
enum Closure<'a> {
    /// boundary rows of K − wB (B diagonal); B = None means Neumann (A₀)
    Robin(Option<&'a [f64]>),
    /// boundary values pinned to zero
    Dirichlet,
}

impl DiscreteTriple {
    /// `is_boundary[i]` marks node i of the symmetric matrix `k` as a boundary
    /// node. `mass` and `weight` are the interior and boundary inner-product
    /// weights.
    pub fn new(k: SymCsr, is_boundary: &[bool], mass: f64, weight: f64) -> Result<Self> {
        let n = k.dim();
        if is_boundary.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: is_boundary.len() });
        }
        if !(mass > 0.0 && weight > 0.0 && mass.is_finite() && weight.is_finite()) {
            return Err(Error::BadGrid(format!("weights must be positive: mass {mass}, weight {weight}")));
        }
        let scale = k.max_abs_row_sum().max(f64::MIN_POSITIVE);
        let defect = k.symmetry_defect() / scale;
        if defect > 1e-14 {
            return Err(Error::NotHermitian { defect });
        }
        // exact symmetrization: averaging both triangles produces bitwise-equal mirrors
        let mut t = Vec::new();
        for i in 0..n {
            for (j, v) in k.row(i) {
                t.push((i, j, 0.5 * (v + k.get(j, i))));
            }
        }
        let k = SymCsr::from_triplets(n, t);
        let mut slots = Vec::with_capacity(n);
        let (mut interior, mut boundary) = (Vec::new(), Vec::new());
        for (i, &b) in is_boundary.iter().enumerate() {
            if b {
                slots.push(Slot::Boundary(boundary.len()));
                boundary.push(i);
            } else {
                slots.push(Slot::Interior(interior.len()));
                interior.push(i);
            }
        }
        if interior.is_empty() || boundary.is_empty() {
            return Err(Error::BadGrid("need at least one interior and one boundary node".into()));
        }
        let half_bandwidth = k.half_bandwidth();
        Ok(DiscreteTriple {
            k,
            slots,
            interior,
            boundary,
            mass,
            weight,
            half_bandwidth,
            dense_limit: DENSE_LIMIT,
            dense: OnceLock::new(),
            min_a0: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &SymCsr {
        &self.k
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_dense(&self) -> bool {
        self.interior.len() <= self.dense_limit && self.boundary.len() <= self.dense_limit
    }

    /// Overrides the interior size up to which dense factorizations are used.
    pub fn with_dense_limit(mut self, limit: usize) -> Self {
        self.dense_limit = limit;
        self.dense = OnceLock::new();
        self.min_a0 = OnceLock::new();
        self
    }

    /// Global node index of the i-th interior / boundary node.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    fn blocks(&self) -> Result<&DenseBlocks> {
        if !self.is_dense() {
            return Err(Error::Unsupported(format!(
                "dense operation on a model with {} interior nodes (limit {})",
                self.interior.len(),
                self.dense_limit
            )));
        }
        self.dense
            .get_or_init(|| {
                let (ni, nb) = (self.interior.len(), self.boundary.len());
                let mut k_ii = DMatrix::zeros(ni, ni);
                let mut k_ib = DMatrix::zeros(ni, nb);
                let mut k_bb = DMatrix::zeros(nb, nb);
                for (gi, slot) in self.slots.iter().enumerate() {
                    for (gj, v) in self.k.row(gi) {
                        match (*slot, self.slots[gj]) {
                            (Slot::Interior(a), Slot::Interior(b)) => k_ii[(a, b)] = v,
                            (Slot::Interior(a), Slot::Boundary(b)) => k_ib[(a, b)] = v,
                            (Slot::Boundary(a), Slot::Boundary(b)) => k_bb[(a, b)] = v,
                            _ => {}
                        }
                    }
                }
                let a1 = &k_ii / self.mass;
                let a1_eigs = real_symmetric_eigenvalues(&a1);
                let a0 = schur_onto_interior(&to_complex(&k_ii), &to_complex(&k_ib), &to_complex(&k_bb), self.mass)?;
                let a0_eigs = hermitian_eigenvalues(&a0);
                Ok(DenseBlocks { k_ii, k_ib, k_bb, a0_eigs, a1_eigs })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Eigenvalues of A₀ (dense models only), ascending.
    pub fn a0_eigenvalues(&self) -> Result<&[f64]> {
        Ok(&self.blocks()?.a0_eigs)
    }

    /// Eigenvalues of A₁ = K_II/m (dense models only), ascending.
    pub fn a1_eigenvalues(&self) -> Result<&[f64]> {
        Ok(&self.blocks()?.a1_eigs)
    }

    /// A₀ as a dense Hermitian matrix on the interior.
    pub fn a0_matrix(&self) -> Result<CMat> {
        self.robin_matrix(&BoundaryParameter::zero(self.n_boundary()))
    }

    /// A₁ as a dense Hermitian matrix on the interior.
    pub fn dirichlet_matrix(&self) -> Result<CMat> {
        Ok(to_complex(&(&self.blocks()?.k_ii / self.mass)))
    }

    /// A_[B]: eliminate u_∂ from Γ₀u = BΓ₁u, i.e. K_∂I u_I + (K_∂∂ − wB) u_∂ = 0.
    pub fn robin_matrix(&self, b: &BoundaryParameter) -> Result<CMat> {
        self.check_b(b)?;
        let blk = self.blocks()?;
        let k_bb = to_complex(&blk.k_bb) - b.matrix() * c(self.weight);
        schur_onto_interior(&to_complex(&blk.k_ii), &to_complex(&blk.k_ib), &k_bb, self.mass)
    }

    /// Whether K_∂∂ − wB is positive definite. Past this point the eliminated
    /// boundary values pass a pole and min σ(A_[ωB]) stops decreasing in ω;
    /// on grid models this is the mesh limit b ≈ 2a/h.
    pub fn coupling_resolved(&self, b: &BoundaryParameter) -> Result<bool> {
        self.check_b(b)?;
        let nb = self.n_boundary();
        let k_bb = CMat::from_fn(nb, nb, |i, j| c(self.k.get(self.boundary[i], self.boundary[j])));
        let block = k_bb - b.matrix() * c(self.weight);
        Ok(hermitian_eigenvalues(&block)[0] > 0.0)
    }

    /// Σ(λ) = K_∂∂ − K_∂I (K_II − λm)⁻¹ K_I∂. Fails near the Dirichlet spectrum.
    pub fn schur_complement(&self, lambda: C) -> Result<CMat> {
        let blk = self.blocks()?;
        let dist = distance_to(&blk.a1_eigs, lambda);
        if dist < self.near_threshold() {
            return Err(Error::SingularSchur { lambda, distance: dist });
        }
        let shifted = to_complex(&blk.k_ii) - CMat::identity(self.n_interior(), self.n_interior()) * (lambda * self.mass);
        let k_ib = to_complex(&blk.k_ib);
        let x = shifted
            .lu()
            .solve(&k_ib)
            .ok_or(Error::SingularSchur { lambda, distance: dist })?;
        Ok(to_complex(&blk.k_bb) - k_ib.adjoint() * x)
    }

    fn check_b(&self, b: &BoundaryParameter) -> Result<()> {
        if b.dim() != self.n_boundary() {
            return Err(Error::DimensionMismatch { expected: self.n_boundary(), got: b.dim() });
        }
        Ok(())
    }

    fn near_threshold(&self) -> f64 {
        NEAR_SPECTRUM_REL * self.spectral_scale()
    }

    fn check_a0_distance(&self, lambda: C) -> Result<()> {
        if self.is_dense() {
            let d = distance_to(&self.blocks()?.a0_eigs, lambda);
            if d < self.near_threshold() {
                return Err(Error::SingularSolve { lambda, distance: d });
            }
        }
        Ok(())
    }

    /// K − λD in the local [I; ∂] ordering, with D = diag(m·1_I, 0).
    fn full_system(&self, lambda: C) -> Result<CMat> {
        let blk = self.blocks()?;
        let (ni, nb) = (self.n_interior(), self.n_boundary());
        let mut f = CMat::zeros(ni + nb, ni + nb);
        for i in 0..ni {
            for j in 0..ni {
                f[(i, j)] = c(blk.k_ii[(i, j)]);
            }
            f[(i, i)] -= lambda * self.mass;
            for j in 0..nb {
                f[(i, ni + j)] = c(blk.k_ib[(i, j)]);
                f[(ni + j, i)] = c(blk.k_ib[(i, j)]);
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                f[(ni + i, ni + j)] = c(blk.k_bb[(i, j)]);
            }
        }
        Ok(f)
    }

    fn split(&self, x: &CMat) -> (CMat, CMat) {
        let ni = self.n_interior();
        let nb = self.n_boundary();
        (x.rows(0, ni).into_owned(), x.rows(ni, nb).into_owned())
    }

    fn require_real(&self, lambda: C) -> Result<f64> {
        if lambda.im != 0.0 {
            return Err(Error::Unsupported(format!(
                "complex lambda on a banded model with {} interior nodes",
                self.n_interior()
            )));
        }
        Ok(lambda.re)
    }

    fn band_factor(&self, sigma: f64, closure: Closure<'_>) -> Result<BandLdl> {
        let m = self.mass;
        let w = self.weight;
        BandLdl::factor(self.k.dim(), self.half_bandwidth, |i, j| match (self.slots[i], self.slots[j]) {
            (Slot::Interior(_), Slot::Interior(_)) => {
                let v = self.k.get(i, j);
                if i == j {
                    v - sigma * m
                } else {
                    v
                }
            }
            (Slot::Boundary(a), Slot::Boundary(_)) => match closure {
                Closure::Dirichlet => {
                    if i == j {
                        1.0
                    } else {
                        0.0
                    }
                }
                Closure::Robin(b) => {
                    let v = self.k.get(i, j);
                    match b {
                        Some(b) if i == j => v - w * b[a],
                        _ => v,
                    }
                }
            },
            _ => match closure {
                Closure::Dirichlet => 0.0,
                Closure::Robin(_) => self.k.get(i, j),
            },
        })
        .map_err(|_| Error::SingularSolve { lambda: C::new(sigma, 0.0), distance: 0.0 })
    }

    fn scatter(&self, interior: Option<&[f64]>, boundary: Option<&[f64]>) -> Vec<f64> {
        let mut x = vec![0.0; self.k.dim()];
        if let Some(v) = interior {
            for (a, &g) in self.interior.iter().enumerate() {
                x[g] = v[a];
            }
        }
        if let Some(v) = boundary {
            for (a, &g) in self.boundary.iter().enumerate() {
                x[g] = v[a];
            }
        }
        x
    }

    fn gather(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            self.interior.iter().map(|&g| x[g]).collect(),
            self.boundary.iter().map(|&g| x[g]).collect(),
        )
    }

    /// Solves with a real banded factor for complex data (real and imaginary
    /// parts separately).
    fn band_solve_complex(&self, ldl: &BandLdl, interior: Option<&CVec>, boundary: Option<&CVec>) -> ExtendedState {
        let part = |f: fn(&C) -> f64| {
            let i: Option<Vec<f64>> = interior.map(|v| v.iter().map(f).collect());
            let b: Option<Vec<f64>> = boundary.map(|v| v.iter().map(f).collect());
            let x = ldl.solve(&self.scatter(i.as_deref(), b.as_deref()));
            self.gather(&x)
        };
        let (ri, rb) = part(|z| z.re);
        let (ii, ib) = part(|z| z.im);
        ExtendedState::new(
            CVec::from_iterator(ri.len(), ri.iter().zip(&ii).map(|(a, b)| C::new(*a, *b))),
            CVec::from_iterator(rb.len(), rb.iter().zip(&ib).map(|(a, b)| C::new(*a, *b))),
        )
    }

    /// Negative eigenvalue count of the boundary block used by `closure`.
    fn boundary_block_negatives(&self, closure: Closure<'_>) -> Result<usize> {
        let b = match closure {
            Closure::Dirichlet => return Ok(0),
            Closure::Robin(b) => b,
        };
        let nb = self.n_boundary();
        let block = DMatrix::from_fn(nb, nb, |a, bb| {
            let v = self.k.get(self.boundary[a], self.boundary[bb]);
            match b {
                Some(d) if a == bb => v - self.weight * d[a],
                _ => v,
            }
        });
        let diagonal = (0..nb).all(|a| (0..nb).all(|bb| a == bb || block[(a, bb)] == 0.0));
        let eigs: Vec<f64> = if diagonal {
            (0..nb).map(|a| block[(a, a)]).collect()
        } else {
            real_symmetric_eigenvalues(&block)
        };
        let scale = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(f64::MIN_POSITIVE);
        if let Some(e) = eigs.iter().find(|e| e.abs() <= 1e-12 * scale) {
            return Err(Error::SingularElimination { smallest: e.abs() });
        }
        Ok(eigs.iter().filter(|e| **e < 0.0).count())
    }

    /// Smallest eigenvalue of the interior operator defined by `closure` via
    /// shift-invert Lanczos on banded factorizations. Inertia of the shifted
    /// system certifies that the shift lies below the spectrum.
    fn banded_min_eig(&self, closure: Closure<'_>, hint: f64) -> Result<f64> {
        let neg_boundary = self.boundary_block_negatives(closure)?;
        let mut sigma = hint;
        let mut ldl = None;
        for _ in 0..60 {
            match self.band_factor(sigma, closure) {
                Ok(f) if f.negative_pivots() == neg_boundary => {
                    ldl = Some(f);
                    break;
                }
                _ => sigma = 2.0 * sigma - 1.0,
            }
        }
        let ldl = ldl.ok_or_else(|| Error::NoConvergence("no shift below the spectrum found".into()))?;
        let est = self.shift_invert(&ldl, sigma, 1e-6)?;
        // second pass with a shift close to the estimate separates the bottom
        let gap = (est - sigma).abs();
        let sigma2 = est - (1e-3 * gap).max(1e-9 * est.abs().max(1.0));
        match self.band_factor(sigma2, closure) {
            Ok(f) if f.negative_pivots() == neg_boundary => self.shift_invert(&f, sigma2, LANCZOS_TOL),
            _ => self.shift_invert(&ldl, sigma, LANCZOS_TOL),
        }
    }

    fn shift_invert(&self, ldl: &BandLdl, sigma: f64, tol: f64) -> Result<f64> {
        let ni = self.n_interior();
        let m = self.mass;
        let theta = lanczos_largest(
            ni,
            |x| {
                let scaled: Vec<f64> = x.iter().map(|v| v * m).collect();
                let y = ldl.solve(&self.scatter(Some(&scaled), None));
                self.gather(&y).0
            },
            LANCZOS_STEPS,
            tol,
        )?;
        Ok(sigma + 1.0 / theta)
    }

    fn diagonal_b<'a>(&self, b: &'a BoundaryParameter, buf: &'a mut Option<Vec<f64>>) -> Result<&'a [f64]> {
        *buf = b.diagonal();
        buf.as_deref().ok_or_else(|| {
            Error::Unsupported("nonlocal boundary parameter on a banded model".into())
        })
    }

    fn initial_shift(&self, b: Option<&[f64]>) -> f64 {
        // crude lower guess; the inertia loop corrects it
        let bmax = b.map(|d| d.iter().copied().fold(0.0f64, f64::max)).unwrap_or(0.0);
        let kmin = (0..self.k.dim())
            .filter(|&i| matches!(self.slots[i], Slot::Interior(_)))
            .map(|i| self.k.get(i, i) - self.k.row(i).filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
            / self.mass;
        // corners of two Robin walls bind at about −2b²
        kmin.min(0.0) - 1.0 - 2.1 * bmax * bmax
    }
}

/// (K_II − K_I∂ K_∂∂⁻¹ K_∂I)/m, requiring K_∂∂ invertible.
fn schur_onto_interior(k_ii: &CMat, k_ib: &CMat, k_bb: &CMat, mass: f64) -> Result<CMat> {
    let eigs = hermitian_eigenvalues(k_bb);
    let scale = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(f64::MIN_POSITIVE);
    let smallest = eigs.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    if smallest <= 1e-12 * scale {
        return Err(Error::SingularElimination { smallest });
    }
    let x = k_bb
        .clone()
        .lu()
        .solve(&k_ib.adjoint())
        .ok_or(Error::SingularElimination { smallest })?;
    let a = (k_ii - k_ib * x) / c(mass);
    // Hermitian by construction; remove round-off asymmetry exactly
    Ok((&a + a.adjoint()) * c(0.5))
}

fn distance_to(eigs: &[f64], lambda: C) -> f64 {
    eigs.iter()
        .map(|e| (C::new(*e, 0.0) - lambda).norm())
        .fold(f64::INFINITY, f64::min)
}

impl TripleModel for DiscreteTriple {
    fn state_dim(&self) -> usize {
        self.interior.len()
    }

    fn boundary_dim(&self) -> usize {
        self.boundary.len()
    }

    fn inner_state(&self, f: &CVec, g: &CVec) -> C {
        g.dotc(f) * self.mass
    }

    fn inner_boundary(&self, a: &CVec, b: &CVec) -> C {
        b.dotc(a) * self.weight
    }

    fn apply_t(&self, u: &ExtendedState) -> CVec {
        let full = self.full_vector(u);
        let ku = self.k.mul_complex(full.as_slice());
        CVec::from_iterator(self.interior.len(), self.interior.iter().map(|&g| ku[g] / self.mass))
    }

    fn trace0(&self, u: &ExtendedState) -> CVec {
        let full = self.full_vector(u);
        let ku = self.k.mul_complex(full.as_slice());
        CVec::from_iterator(self.boundary.len(), self.boundary.iter().map(|&g| ku[g] / self.weight))
    }

    fn trace1(&self, u: &ExtendedState) -> CVec {
        u.boundary.clone()
    }

    fn min_sigma_a0(&self) -> f64 {
        *self.min_a0.get_or_init(|| {
            if self.is_dense() {
                self.blocks().map(|b| b.a0_eigs[0]).unwrap_or(f64::NAN)
            } else {
                self.banded_min_eig(Closure::Robin(None), self.initial_shift(None))
                    .unwrap_or(f64::NAN)
            }
        })
    }

    fn spectral_scale(&self) -> f64 {
        if self.is_dense() {
            if let Ok(b) = self.blocks() {
                let lo = b.a0_eigs.first().copied().unwrap_or(0.0).abs();
                let hi = b.a0_eigs.last().copied().unwrap_or(0.0).abs();
                return lo.max(hi).max(f64::MIN_POSITIVE);
            }
        }
        (self.k.max_abs_row_sum() / self.mass).max(f64::MIN_POSITIVE)
    }

    fn operator_scale(&self) -> f64 {
        self.k.max_abs_row_sum() / self.mass.min(self.weight)
    }

    fn gamma_field(&self, lambda: C, phi: &CVec) -> Result<ExtendedState> {
        self.check_a0_distance(lambda)?;
        let phi_w = phi * c(self.weight);
        if self.is_dense() {
            let f = self.full_system(lambda)?;
            let mut rhs = CVec::zeros(self.n_interior() + self.n_boundary());
            rhs.rows_mut(self.n_interior(), self.n_boundary()).copy_from(&phi_w);
            let x = f.lu().solve(&rhs).ok_or(Error::SingularSolve { lambda, distance: 0.0 })?;
            let (ui, ub) = self.split(&CMat::from_column_slice(x.len(), 1, x.as_slice()));
            Ok(ExtendedState::new(ui.column(0).into_owned(), ub.column(0).into_owned()))
        } else {
            let l = self.require_real(lambda)?;
            let ldl = self.band_factor(l, Closure::Robin(None))?;
            Ok(self.band_solve_complex(&ldl, None, Some(&phi_w)))
        }
    }

    fn weyl(&self, lambda: C) -> Result<WeylValue> {
        self.check_a0_distance(lambda)?;
        let nb = self.n_boundary();
        if self.is_dense() {
            let f = self.full_system(lambda)?;
            let mut rhs = CMat::zeros(self.n_interior() + nb, nb);
            for j in 0..nb {
                rhs[(self.n_interior() + j, j)] = c(self.weight);
            }
            let x = f.lu().solve(&rhs).ok_or(Error::SingularSolve { lambda, distance: 0.0 })?;
            let (_, m) = self.split(&x);
            Ok(WeylValue { lambda, matrix: m })
        } else {
            let l = self.require_real(lambda)?;
            let ldl = self.band_factor(l, Closure::Robin(None))?;
            let mut m = CMat::zeros(nb, nb);
            for j in 0..nb {
                let mut e = vec![0.0; nb];
                e[j] = self.weight;
                let (_, ub) = self.gather(&ldl.solve(&self.scatter(None, Some(&e))));
                for i in 0..nb {
                    m[(i, j)] = c(ub[i]);
                }
            }
            Ok(WeylValue { lambda, matrix: m })
        }
    }

    fn weyl_norm(&self, lambda: f64) -> Result<f64> {
        if self.is_dense() {
            // below σ(A₀) M = w·S⁻¹ with S the real boundary Schur complement
            if lambda < self.min_sigma_a0() {
                let blk = self.blocks()?;
                let ni = self.n_interior();
                let shifted = &blk.k_ii - DMatrix::identity(ni, ni) * (lambda * self.mass);
                if let Some(chol) = shifted.cholesky() {
                    let s = &blk.k_bb - blk.k_ib.transpose() * chol.solve(&blk.k_ib);
                    let s = (&s + s.transpose()) * 0.5;
                    let smallest = real_symmetric_eigenvalues(&s)[0];
                    if smallest > 0.0 {
                        return Ok(self.weight / smallest);
                    }
                }
            }
            return Ok(self.weyl(C::new(lambda, 0.0))?.norm());
        }
        if !(lambda < self.min_sigma_a0()) {
            return Err(Error::Unsupported("banded Weyl norm needs lambda below min σ(A0)".into()));
        }
        let ldl = self.band_factor(lambda, Closure::Robin(None))?;
        let w = self.weight;
        lanczos_largest(
            self.n_boundary(),
            |phi| {
                let scaled: Vec<f64> = phi.iter().map(|v| v * w).collect();
                self.gather(&ldl.solve(&self.scatter(None, Some(&scaled)))).1
            },
            LANCZOS_STEPS,
            LANCZOS_TOL,
        )
    }

    fn resolvent_a0_state(&self, lambda: C, f: &CVec) -> Result<ExtendedState> {
        self.check_a0_distance(lambda)?;
        let fm = f * c(self.mass);
        if self.is_dense() {
            let sys = self.full_system(lambda)?;
            let mut rhs = CVec::zeros(self.n_interior() + self.n_boundary());
            rhs.rows_mut(0, self.n_interior()).copy_from(&fm);
            let x = sys.lu().solve(&rhs).ok_or(Error::SingularSolve { lambda, distance: 0.0 })?;
            let (ui, ub) = self.split(&CMat::from_column_slice(x.len(), 1, x.as_slice()));
            Ok(ExtendedState::new(ui.column(0).into_owned(), ub.column(0).into_owned()))
        } else {
            let l = self.require_real(lambda)?;
            let ldl = self.band_factor(l, Closure::Robin(None))?;
            Ok(self.band_solve_complex(&ldl, Some(&fm), None))
        }
    }

    fn robin_resolvent(&self, b: &BoundaryParameter, lambda: C, f: &CVec) -> Result<CVec> {
        self.check_b(b)?;
        if self.is_dense() {
            let a = self.robin_matrix(b)?;
            let n = a.nrows();
            if n <= 400 {
                let d = distance_to(&hermitian_eigenvalues(&a), lambda);
                if d < self.near_threshold() {
                    return Err(Error::SingularSolve { lambda, distance: d });
                }
            }
            let shifted = a - CMat::identity(n, n) * lambda;
            shifted.lu().solve(f).ok_or(Error::SingularSolve { lambda, distance: 0.0 })
        } else {
            let l = self.require_real(lambda)?;
            let mut buf = None;
            let d = self.diagonal_b(b, &mut buf)?;
            let ldl = self.band_factor(l, Closure::Robin(Some(d)))?;
            let fm = f * c(self.mass);
            Ok(self.band_solve_complex(&ldl, Some(&fm), None).interior)
        }
    }

    fn min_sigma_robin(&self, b: &BoundaryParameter) -> Result<f64> {
        self.check_b(b)?;
        if self.is_dense() {
            Ok(hermitian_eigenvalues(&self.robin_matrix(b)?)[0])
        } else {
            let mut buf = None;
            let d = self.diagonal_b(b, &mut buf)?;
            self.banded_min_eig(Closure::Robin(Some(d)), self.initial_shift(Some(d)))
        }
    }

    fn min_sigma_dirichlet(&self) -> Result<f64> {
        if self.is_dense() {
            Ok(self.blocks()?.a1_eigs[0])
        } else {
            self.banded_min_eig(Closure::Dirichlet, self.initial_shift(None))
        }
    }

    fn dirichlet_is_hermitian(&self) -> bool {
        // K_II is a principal block of the exactly symmetric K
        true
    }
}

impl DiscreteTriple {
    fn full_vector(&self, u: &ExtendedState) -> CVec {
        let mut x = CVec::from_element(self.k.dim(), ZERO);
        for (a, &g) in self.interior.iter().enumerate() {
            x[g] = u.interior[a];
        }
        for (a, &g) in self.boundary.iter().enumerate() {
            x[g] = u.boundary[a];
        }
        x
    }

    /// Extended state with the given interior and boundary values.
    pub fn state(&self, interior: CVec, boundary: CVec) -> ExtendedState {
        ExtendedState::new(interior, boundary)
    }

    /// Unit vector helper for tests and reports.
    pub fn boundary_unit(&self, j: usize) -> CVec {
        let mut e = CVec::zeros(self.n_boundary());
        e[j] = ONE;
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Path graph: boundary node 0, interior 1..=3, boundary node 4.
    fn path_model() -> DiscreteTriple {
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.push((i, i, 1.0));
            t.push((i + 1, i + 1, 1.0));
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
        let k = SymCsr::from_triplets(n, t);
        DiscreteTriple::new(k, &[true, false, false, false, true], 1.0, 1.0).unwrap()
    }

    #[test]
    fn neumann_path_has_constant_kernel() {
        let m = path_model();
        assert!(m.min_sigma_a0().abs() < 1e-12);
        assert_eq!(m.n_interior(), 3);
        assert_eq!(m.n_boundary(), 2);
    }

    #[test]
    fn zero_flux_gives_zero_state() {
        let m = path_model();
        let u = m.gamma_field(c(-1.0), &CVec::zeros(2)).unwrap();
        assert_eq!(u.norm(), 0.0);
    }

    #[test]
    fn gamma_field_near_a0_spectrum_is_rejected() {
        let m = path_model();
        let e = m.a0_eigenvalues().unwrap()[1];
        let r = m.gamma_field(c(e), &m.boundary_unit(0));
        assert!(matches!(r, Err(Error::SingularSolve { .. })));
    }

    #[test]
    fn schur_near_dirichlet_spectrum_is_rejected() {
        let m = path_model();
        let e = m.a1_eigenvalues().unwrap()[0];
        assert!(matches!(m.schur_complement(c(e)), Err(Error::SingularSchur { .. })));
        // the Weyl function itself is fine there
        assert!(m.weyl(c(e)).is_ok());
    }

    #[test]
    fn weyl_is_inverse_schur_scaled() {
        let m = path_model();
        let lam = c(-0.7);
        let s = m.schur_complement(lam).unwrap();
        let w = m.weyl(lam).unwrap().matrix;
        let prod = s * w / c(m.weight());
        assert!((prod - CMat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn robin_zero_is_a0() {
        let m = path_model();
        let a0 = m.a0_matrix().unwrap();
        let r = m.robin_matrix(&BoundaryParameter::zero(2)).unwrap();
        assert_eq!(a0, r);
    }
}
