//! Cell-centered finite-volume discretization of
//! `ℒu = −Σ ∂_j a_jk ∂_k u + a u` on intervals, rectangles and truncated strips.
//!
//! Unknowns sit at cell centers; boundary nodes sit on the walls, half a cell
//! from the nearest center, so the wall flux `2a(u_wall − u_cell)/h` is the
//! outward conormal derivative to second order. Corner points carry no node.
//! The energy matrix is assembled face by face, which keeps it exactly
//! symmetric.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CVec, SymCsr, C};
use crate::models::discrete::DiscreteTriple;
use crate::models::BoundaryParameter;
use crate::triple::{ExtendedState, TripleModel, WeylValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// [0, L]
    Interval,
    /// [0, Lx] × [0, Ly], boundary nodes on all four walls
    Rectangle,
    /// [0, Λ] × [0, W]: walls at x = 0, y = 0, y = W; x = Λ is a Neumann cap
    /// without boundary nodes
    Strip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub shape: Shape,
    /// One length for an interval, two for rectangles and strips.
    pub extents: Vec<f64>,
    pub h: f64,
}

impl GridSpec {
    pub fn interval(length: f64, h: f64) -> Self {
        GridSpec { shape: Shape::Interval, extents: vec![length], h }
    }

    pub fn rectangle(lx: f64, ly: f64, h: f64) -> Self {
        GridSpec { shape: Shape::Rectangle, extents: vec![lx, ly], h }
    }

    pub fn strip(truncation: f64, width: f64, h: f64) -> Self {
        GridSpec { shape: Shape::Strip, extents: vec![truncation, width], h }
    }

    pub fn dimension(&self) -> usize {
        match self.shape {
            Shape::Interval => 1,
            _ => 2,
        }
    }

    /// Cell counts per axis (1 on the unused axis in 1D).
    fn cells(&self) -> Result<(usize, usize)> {
        let d = self.dimension();
        if self.extents.len() != d {
            return Err(Error::BadGrid(format!("{:?} needs {d} extents, got {}", self.shape, self.extents.len())));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::BadGrid(format!("spacing must be positive, got {}", self.h)));
        }
        let mut n = [1usize; 2];
        for (axis, &len) in self.extents.iter().enumerate() {
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::BadGrid(format!("extent {axis} must be positive, got {len}")));
            }
            let cells = (len / self.h).round();
            if cells < 1.0 || (cells * self.h - len).abs() > 1e-6 * len {
                return Err(Error::BadGrid(format!("extent {len} is not a multiple of h = {}", self.h)));
            }
            n[axis] = cells as usize;
        }
        Ok((n[0], n[1]))
    }
}

/// `base + amp·cos(kx·x + phase_x)·cos(ky·y + phase_y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineField {
    pub base: f64,
    #[serde(default)]
    pub amp: f64,
    #[serde(default)]
    pub kx: f64,
    #[serde(default)]
    pub ky: f64,
    #[serde(default)]
    pub phase_x: f64,
    #[serde(default)]
    pub phase_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    Field(CosineField),
}

impl Coefficient {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::Field(f) => f.base + f.amp * (f.kx * x + f.phase_x).cos() * (f.ky * y + f.phase_y).cos(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Coefficient::Constant(v) => v.is_finite(),
            Coefficient::Field(f) => [f.base, f.amp, f.kx, f.ky, f.phase_x, f.phase_y].iter().all(|v| v.is_finite()),
        }
    }
}

fn one() -> Coefficient {
    Coefficient::Constant(1.0)
}

fn zero() -> Coefficient {
    Coefficient::Constant(0.0)
}

/// Coefficients of ℒ; a12 is ignored in 1D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSpec {
    #[serde(default = "one")]
    pub a11: Coefficient,
    #[serde(default = "one")]
    pub a22: Coefficient,
    #[serde(default = "zero")]
    pub a12: Coefficient,
    #[serde(default = "zero")]
    pub a: Coefficient,
}

impl Default for CoeffSpec {
    fn default() -> Self {
        CoeffSpec { a11: one(), a22: one(), a12: zero(), a: zero() }
    }
}

impl CoeffSpec {
    pub fn laplacian() -> Self {
        Self::default()
    }

    pub fn with_potential(a: f64) -> Self {
        CoeffSpec { a: Coefficient::Constant(a), ..Self::default() }
    }

    pub fn constant(a11: f64, a22: f64, a12: f64, a: f64) -> Self {
        CoeffSpec {
            a11: Coefficient::Constant(a11),
            a22: Coefficient::Constant(a22),
            a12: Coefficient::Constant(a12),
            a: Coefficient::Constant(a),
        }
    }
}

/// Node layout of the extended (p, q) lattice; p = 0 and p = nx + 1 are wall
/// columns, likewise for q in 2D.
#[derive(Debug, Clone)]
struct Lattice {
    shape: Shape,
    nx: usize,
    ny: usize,
    h: f64,
    lx: f64,
    ly: f64,
    index: Vec<Option<usize>>,
    boundary: Vec<bool>,
    coords: Vec<[f64; 2]>,
}

impl Lattice {
    fn new(spec: &GridSpec) -> Result<Self> {
        let (nx, ny) = spec.cells()?;
        let lx = spec.extents[0];
        let ly = spec.extents.get(1).copied().unwrap_or(0.0);
        let two_d = spec.dimension() == 2;
        let qs = if two_d { ny + 2 } else { 1 };
        let mut lat = Lattice {
            shape: spec.shape,
            nx,
            ny,
            h: spec.h,
            lx,
            ly,
            index: vec![None; (nx + 2) * qs],
            boundary: Vec::new(),
            coords: Vec::new(),
        };
        for p in 0..nx + 2 {
            for q in 0..qs {
                let wall_x = p == 0 || p == nx + 1;
                let wall_y = two_d && (q == 0 || q == ny + 1);
                let exists = match (wall_x, wall_y) {
                    (true, true) => false,
                    (true, false) => !(spec.shape == Shape::Strip && p == nx + 1),
                    _ => true,
                };
                if exists {
                    lat.index[p * qs + q] = Some(lat.boundary.len());
                    lat.boundary.push(wall_x || wall_y);
                    lat.coords.push([lat.x(p), if two_d { lat.y(q) } else { 0.0 }]);
                }
            }
        }
        Ok(lat)
    }

    fn two_d(&self) -> bool {
        self.shape != Shape::Interval
    }

    fn x(&self, p: usize) -> f64 {
        if p == 0 {
            0.0
        } else if p == self.nx + 1 {
            self.lx
        } else {
            (p as f64 - 0.5) * self.h
        }
    }

    fn y(&self, q: usize) -> f64 {
        if q == 0 {
            0.0
        } else if q == self.ny + 1 {
            self.ly
        } else {
            (q as f64 - 0.5) * self.h
        }
    }

    fn node(&self, p: usize, q: usize) -> Option<usize> {
        let qs = if self.two_d() { self.ny + 2 } else { 1 };
        self.index[p * qs + q]
    }

    fn cell_range_q(&self) -> std::ops::RangeInclusive<usize> {
        if self.two_d() {
            1..=self.ny
        } else {
            0..=0
        }
    }
}

/// Per-face data gathered during assembly.
struct Assembly {
    triplets: Vec<(usize, usize, f64)>,
    unit: Vec<(usize, usize, f64)>,
    form_ellipticity: f64,
}

impl Assembly {
    fn face(&mut self, i: usize, j: usize, weight: f64, unit_weight: f64) {
        for (t, w) in [(&mut self.triplets, weight), (&mut self.unit, unit_weight)] {
            t.push((i, i, w));
            t.push((j, j, w));
            t.push((i, j, -w));
            t.push((j, i, -w));
        }
    }
}

/// Grid-discretized uniformly elliptic operator with its boundary triple.
#[derive(Debug)]
pub struct DiscreteEllipticModel {
    triple: DiscreteTriple,
    grid: GridSpec,
    coeff: CoeffSpec,
    ellipticity: f64,
    form_ellipticity: f64,
    essinf_a: f64,
    gradient: SymCsr,
    boundary_points: Vec<[f64; 2]>,
}

impl Deref for DiscreteEllipticModel {
    type Target = DiscreteTriple;
    fn deref(&self) -> &DiscreteTriple {
        &self.triple
    }
}

pub fn build_discrete_model(grid: &GridSpec, coeff: &CoeffSpec) -> Result<DiscreteEllipticModel> {
    let lat = Lattice::new(grid)?;
    for (name, c) in [("a11", &coeff.a11), ("a22", &coeff.a22), ("a12", &coeff.a12), ("a", &coeff.a)] {
        if !c.is_finite() {
            return Err(Error::BadGrid(format!("coefficient {name} is not finite")));
        }
    }
    let ellipticity = check_ellipticity(&lat, coeff)?;

    let h = lat.h;
    let d = grid.dimension() as i32;
    let face_scale = h.powi(d - 2);
    let mass = h.powi(d);
    let weight = h.powi(d - 1);
    let mut asm = Assembly { triplets: Vec::new(), unit: Vec::new(), form_ellipticity: f64::INFINITY };
    let (nx, ny) = (lat.nx, lat.ny);
    let two_d = lat.two_d();
    // |a12| at a vertex, zero where no mixed stencil is placed
    let vertex_a12 = |p: usize, q: usize| -> f64 {
        if two_d && (1..nx).contains(&p) && (1..ny).contains(&q) {
            coeff.a12.eval(p as f64 * h, q as f64 * h).abs()
        } else {
            0.0
        }
    };

    // x-faces: between (p, q) and (p + 1, q)
    for p in 0..=nx {
        for q in lat.cell_range_q() {
            let (Some(i), Some(j)) = (lat.node(p, q), lat.node(p + 1, q)) else { continue };
            let y = if two_d { lat.y(q) } else { 0.0 };
            let wall = p == 0 || p == nx;
            let (a, unit) = if wall {
                let xw = if p == 0 { 0.0 } else { lat.lx };
                (2.0 * coeff.a11.eval(xw, y), 2.0)
            } else {
                (coeff.a11.eval(p as f64 * h, y), 1.0)
            };
            asm.face(i, j, a * face_scale, unit * face_scale);
            let lower = if two_d && !wall { vertex_a12(p, q - 1) + vertex_a12(p, q) } else { 0.0 };
            asm.form_ellipticity = asm.form_ellipticity.min(a / unit - lower / 2.0);
        }
    }
    if two_d {
        for p in 1..=nx {
            for q in 0..=ny {
                let (Some(i), Some(j)) = (lat.node(p, q), lat.node(p, q + 1)) else { continue };
                let x = lat.x(p);
                let wall = q == 0 || q == ny;
                let (a, unit) = if wall {
                    let yw = if q == 0 { 0.0 } else { lat.ly };
                    (2.0 * coeff.a22.eval(x, yw), 2.0)
                } else {
                    (coeff.a22.eval(x, q as f64 * h), 1.0)
                };
                asm.face(i, j, a * face_scale, unit * face_scale);
                let lower = if !wall { vertex_a12(p - 1, q) + vertex_a12(p, q) } else { 0.0 };
                asm.form_ellipticity = asm.form_ellipticity.min(a / unit - lower / 2.0);
            }
        }
        // mixed derivative at vertices surrounded by four cells
        for p in 1..nx {
            for q in 1..ny {
                let a12 = coeff.a12.eval(p as f64 * h, q as f64 * h);
                if a12 == 0.0 {
                    continue;
                }
                let n = |pp, qq| lat.node(pp, qq).expect("interior cell");
                let cells = [n(p, q), n(p + 1, q), n(p, q + 1), n(p + 1, q + 1)];
                let cx = [-1.0, 1.0, -1.0, 1.0];
                let cy = [-1.0, -1.0, 1.0, 1.0];
                let s = a12 * face_scale / 4.0;
                for r in 0..4 {
                    for t in 0..4 {
                        asm.triplets.push((cells[r], cells[t], s * (cx[r] * cy[t] + cy[r] * cx[t])));
                    }
                }
            }
        }
    }
    let mut essinf_a = f64::INFINITY;
    for p in 1..=nx {
        for q in lat.cell_range_q() {
            let i = lat.node(p, q).expect("cell node");
            let a = coeff.a.eval(lat.x(p), if two_d { lat.y(q) } else { 0.0 });
            essinf_a = essinf_a.min(a);
            if a != 0.0 {
                asm.triplets.push((i, i, mass * a));
            }
        }
    }

    let n = lat.boundary.len();
    let k = SymCsr::from_triplets(n, asm.triplets);
    let gradient = SymCsr::from_triplets(n, asm.unit);
    let triple = DiscreteTriple::new(k, &lat.boundary, mass, weight)?;
    let boundary_points = triple.boundary_nodes().iter().map(|&g| lat.coords[g]).collect();
    Ok(DiscreteEllipticModel {
        triple,
        grid: grid.clone(),
        coeff: coeff.clone(),
        ellipticity,
        form_ellipticity: asm.form_ellipticity,
        essinf_a,
        gradient,
        boundary_points,
    })
}

/// Smallest eigenvalue of the coefficient matrix over all sample points
/// (cell centers, face midpoints, vertices and wall nodes).
fn check_ellipticity(lat: &Lattice, coeff: &CoeffSpec) -> Result<f64> {
    let h = lat.h;
    let mut worst = f64::INFINITY;
    let mut at = (0.0, 0.0);
    let (mx, my) = if lat.two_d() { (2 * lat.nx, 2 * lat.ny) } else { (2 * lat.nx, 0) };
    for i in 0..=mx {
        for j in 0..=my {
            let x = (i as f64 * 0.5 * h).min(lat.lx);
            let y = (j as f64 * 0.5 * h).min(lat.ly);
            let a11 = coeff.a11.eval(x, y);
            let e = if lat.two_d() {
                let a22 = coeff.a22.eval(x, y);
                let a12 = coeff.a12.eval(x, y);
                let mean = 0.5 * (a11 + a22);
                let rad = (0.25 * (a11 - a22).powi(2) + a12 * a12).sqrt();
                mean - rad
            } else {
                a11
            };
            if e < worst {
                worst = e;
                at = (x, y);
            }
        }
    }
    if !(worst > 0.0) {
        return Err(Error::EllipticityViolation { x: at.0, y: at.1, eig: worst });
    }
    Ok(worst)
}

impl DiscreteEllipticModel {
    pub fn triple(&self) -> &DiscreteTriple {
        &self.triple
    }

    /// See [`DiscreteTriple::with_dense_limit`].
    pub fn with_dense_limit(mut self, limit: usize) -> Self {
        self.triple = self.triple.with_dense_limit(limit);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &CoeffSpec {
        &self.coeff
    }

    /// Pointwise ellipticity constant E of the coefficient field.
    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }

    /// Constant E_h with uᵀK_grad u ≥ E_h·uᵀGu for the assembled stencil, G
    /// being the unit-coefficient gradient form. Used by the form route,
    /// where the discrete inequality is what has to hold.
    pub fn form_ellipticity(&self) -> f64 {
        self.form_ellipticity
    }

    /// Minimum of the potential over cell centers.
    pub fn essinf_potential(&self) -> f64 {
        self.essinf_a
    }

    /// Gradient form with unit coefficients on all nodes.
    pub fn gradient_form(&self) -> &SymCsr {
        &self.gradient
    }

    /// Coordinates of the boundary nodes in boundary order.
    pub fn boundary_points(&self) -> &[[f64; 2]] {
        &self.boundary_points
    }

    /// Robin coefficient b sampled at the boundary nodes.
    pub fn sample_boundary(&self, b: impl Fn(f64, f64) -> f64) -> Result<BoundaryParameter> {
        BoundaryParameter::local(self.boundary_points.iter().map(|p| b(p[0], p[1])).collect())
    }
}

impl TripleModel for DiscreteEllipticModel {
    fn state_dim(&self) -> usize {
        self.triple.state_dim()
    }
    fn boundary_dim(&self) -> usize {
        self.triple.boundary_dim()
    }
    fn inner_state(&self, f: &CVec, g: &CVec) -> C {
        self.triple.inner_state(f, g)
    }
    fn inner_boundary(&self, a: &CVec, b: &CVec) -> C {
        self.triple.inner_boundary(a, b)
    }
    fn apply_t(&self, u: &ExtendedState) -> CVec {
        self.triple.apply_t(u)
    }
    fn trace0(&self, u: &ExtendedState) -> CVec {
        self.triple.trace0(u)
    }
    fn trace1(&self, u: &ExtendedState) -> CVec {
        self.triple.trace1(u)
    }
    fn min_sigma_a0(&self) -> f64 {
        self.triple.min_sigma_a0()
    }
    fn spectral_scale(&self) -> f64 {
        self.triple.spectral_scale()
    }
    fn operator_scale(&self) -> f64 {
        self.triple.operator_scale()
    }
    fn gamma_field(&self, lambda: C, phi: &CVec) -> Result<ExtendedState> {
        self.triple.gamma_field(lambda, phi)
    }
    fn weyl(&self, lambda: C) -> Result<WeylValue> {
        self.triple.weyl(lambda)
    }
    fn weyl_norm(&self, lambda: f64) -> Result<f64> {
        self.triple.weyl_norm(lambda)
    }
    fn resolvent_a0_state(&self, lambda: C, f: &CVec) -> Result<ExtendedState> {
        self.triple.resolvent_a0_state(lambda, f)
    }
    fn robin_resolvent(&self, b: &BoundaryParameter, lambda: C, f: &CVec) -> Result<CVec> {
        self.triple.robin_resolvent(b, lambda, f)
    }
    fn min_sigma_robin(&self, b: &BoundaryParameter) -> Result<f64> {
        self.triple.min_sigma_robin(b)
    }
    fn min_sigma_dirichlet(&self) -> Result<f64> {
        self.triple.min_sigma_dirichlet()
    }
    fn dirichlet_is_hermitian(&self) -> bool {
        self.triple.dirichlet_is_hermitian()
    }
}
