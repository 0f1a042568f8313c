//! Exact computation of spin stratum classes of abelian differentials on
//! moduli spaces of stable curves.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`] — rationals, polynomial interpolation, linear solving;
//! * [`graph`] — stable graphs, canonical forms, contractions, enumeration;
//! * [`correlator`] — ψ/κ intersection numbers;
//! * [`taut`] — tautological classes as decorated stable graphs;
//! * [`level`] — signatures, generalised strata, two-level graphs;
//! * [`spin_comb`] — spin parity combinatorics of level graphs;
//! * [`pixton`] — Pixton's formula for (spin) double ramification cycles;
//! * [`recursion`] — stratum classes via the clutching pullback formula.

pub mod algebra;
pub mod correlator;
pub mod error;
pub mod graph;
pub mod level;
pub mod pixton;
pub mod recursion;
pub mod spin_comb;
pub mod taut;

pub use error::{Error, Result};
