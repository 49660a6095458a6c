//! Exact computations on positive definite integral lattices.
//!
//! * [`ratmat`]: rational scalars, symmetric matrices, determinants and
//!   semidefiniteness.
//! * [`lattice`]: duals, orthogonal complements, primitive closures,
//!   discriminant cosets.
//! * [`local`]: p-adic square classes, Hilbert and Hasse symbols.
//! * [`embedding`]: feasibility of embedding into (odd) unimodular lattices.
//! * [`shortvec`]: exact short-vector enumeration.
//! * [`eutactic`]: eutactic stars, the integer feasibility decision for
//!   s-integrability, and pair-based refutation certificates.
//! * [`a15`]: the unimodular lattice `A15+`, norm-3 triples and the four
//!   rank-12 complements.
//! * [`verify`]: the end-to-end verification report.

// index loops read closer to the matrix formulas they implement
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod a15;
pub mod embedding;
pub mod error;
pub mod eutactic;
pub mod intmat;
pub mod lattice;
pub mod local;
pub mod par;
pub mod ratmat;
pub mod shortvec;
pub mod solver;
pub mod verify;

pub use error::{LatticeError, Result};
pub use lattice::{Lattice, Parity};
pub use ratmat::{Matrix, Rational, SymMatrix};
