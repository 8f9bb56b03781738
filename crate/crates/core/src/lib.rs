//! Boundary triples, Weyl functions and Krein-type resolvent formulas for
//! discretized elliptic operators and half-line Schrödinger operators, with
//! spectral lower-bound certificates derived from Weyl-function decay.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod krein;
pub mod linalg;
pub mod models;
pub mod random;
pub mod spectral;
pub mod triple;

pub use error::{Error, Result};
pub use triple::{ExtendedState, TripleModel, WeylValue};
