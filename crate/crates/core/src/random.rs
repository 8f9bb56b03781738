//! Seeded random instances for property tests and the acceptance suite.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, CMat, CVec, SymCsr, C};
use crate::models::{BoundaryParameter, DiscreteTriple};
use crate::triple::ExtendedState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weighted graph Laplacian on interior ∪ boundary nodes plus a nonnegative
/// interior potential. Interior nodes form a chain with extra random edges;
/// each boundary node is linked to one to three interior nodes, and a few
/// boundary pairs are linked directly. Mass and weight are drawn from
/// [0.5, 2].
pub fn random_discrete(rng: &mut impl Rng, n_interior: usize, n_boundary: usize) -> DiscreteTriple {
    assert!(n_interior >= 1 && n_boundary >= 1);
    let n = n_interior + n_boundary;
    let mut t = Vec::new();
    let edge = |t: &mut Vec<(usize, usize, f64)>, i: usize, j: usize, w: f64| {
        t.push((i, i, w));
        t.push((j, j, w));
        t.push((i, j, -w));
        t.push((j, i, -w));
    };
    for i in 1..n_interior {
        let w = rng.gen_range(0.5..2.0);
        edge(&mut t, i - 1, i, w);
    }
    for _ in 0..n_interior / 2 {
        let i = rng.gen_range(0..n_interior);
        let j = rng.gen_range(0..n_interior);
        if i != j {
            let w = rng.gen_range(0.5..2.0);
            edge(&mut t, i, j, w);
        }
    }
    for b in 0..n_boundary {
        let links = rng.gen_range(1..=3);
        for _ in 0..links {
            let i = rng.gen_range(0..n_interior);
            let w = rng.gen_range(0.5..2.0);
            edge(&mut t, n_interior + b, i, w);
        }
        if b > 0 && rng.gen_bool(0.2) {
            let w = rng.gen_range(0.5..2.0);
            edge(&mut t, n_interior + b - 1, n_interior + b, w);
        }
    }
    for i in 0..n_interior {
        let v = rng.gen_range(0.0..1.0);
        t.push((i, i, v));
    }
    let k = SymCsr::from_triplets(n, t);
    let mut is_boundary = vec![false; n_interior];
    is_boundary.resize(n, true);
    let mass = rng.gen_range(0.5..2.0);
    let weight = rng.gen_range(0.5..2.0);
    DiscreteTriple::new(k, &is_boundary, mass, weight).expect("graph Laplacian is symmetric")
}

/// Random sizes within the acceptance envelope followed by the model.
pub fn random_sized_discrete(rng: &mut impl Rng, max_interior: usize, max_boundary: usize) -> DiscreteTriple {
    let ni = rng.gen_range(4..=max_interior);
    let nb = rng.gen_range(1..=max_boundary.min(ni));
    random_discrete(rng, ni, nb)
}

pub fn random_cvec(rng: &mut impl Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_state(rng: &mut impl Rng, state_dim: usize, boundary_len: usize) -> ExtendedState {
    ExtendedState::new(random_cvec(rng, state_dim), random_cvec(rng, boundary_len))
}

/// Random complex Hermitian matrix with entries of modulus at most `scale`.
pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale);
    (&a + a.adjoint()) * c(0.5)
}

pub fn random_boundary_parameter(rng: &mut impl Rng, n: usize, scale: f64) -> BoundaryParameter {
    BoundaryParameter::nonlocal(random_hermitian(rng, n, scale)).expect("Hermitian by construction")
}

/// B = −XXᴴ, negative semidefinite, with a random rank between 1 and n.
pub fn random_nonpositive(rng: &mut impl Rng, n: usize, scale: f64) -> BoundaryParameter {
    let rank = rng.gen_range(1..=n);
    let x = CMat::from_fn(n, rank, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale);
    let b = -(&x * x.adjoint());
    BoundaryParameter::nonlocal((&b + b.adjoint()) * c(0.5)).expect("Hermitian by construction")
}
