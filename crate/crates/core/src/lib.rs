//! Fluxonium qutrit arrays, from circuit parameters to many-body dynamics.
//!
//! The pipeline runs circuit spectra → qutrit constants and coherence →
//! two-atom effective model → lattice model, which is then treated either in
//! Gutzwiller mean field or by exact diagonalization in a fixed particle
//! number sector.

// `!(a < b)` is used on purpose: it also rejects NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod ed;
pub mod effective;
pub mod error;
pub mod gutzwiller;
pub mod linalg;
pub mod qutrit;
pub mod units;

pub use circuit::{CircuitSpec, HhjjSpec, Spectrum};
pub use ed::{SectorBasis, SectorState, SparseHamiltonian};
pub use effective::{Boundary, CouplingSpec, LatticeModel, TwoQutritMatrix};
pub use error::{Error, Result};
pub use gutzwiller::GutzwillerSolution;
pub use qutrit::{CoherenceParams, LevelPolicy, QutritDescriptor, Regime};
