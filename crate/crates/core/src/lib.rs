//! Exact and approximate common factors of matrix polynomials.
//!
//! Two solvers are provided for the approximate problem: a fast subspace
//! method working on the null space of a generalized Sylvester resultant,
//! and a more accurate two-level gradient-flow method that drives a chosen
//! singular value of a structured perturbation of the resultant to zero.
//! The [`control`] module applies them to the distance to uncontrollability
//! of input/output systems.

pub mod cli;
pub mod control;
pub mod error;
pub mod matpoly;
pub mod numkernel;
pub mod odegcd;
pub mod structmat;
pub mod subspace;

pub use control::{distance_to_uncontrollability, is_controllable, IoSystem};
pub use error::{Error, Result};
pub use matpoly::{dist, random_with_common_factor, FactorizationTriple, MatPoly, PolyPair};
