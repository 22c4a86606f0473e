//! Two-atom effective Hamiltonians and the lattice model they define.

mod capacitance;
mod full;
mod lattice;
mod rwa;
mod schrieffer_wolff;

pub use capacitance::inverse_capacitance_row;
pub use full::{full_two_atom_blocks, full_two_atom_diagonalization, FullTwoAtomOptions};
pub use lattice::{build_lattice_model, Boundary, LatticeModel};
pub use rwa::{build_two_qutrit_rwa, extract_effective_params, EffectiveParams, TwoQutritMatrix};
pub use schrieffer_wolff::{
    schrieffer_wolff_correction, ExcludedPair, SwCorrection, DEFAULT_LEVEL_CUTOFF, DEFAULT_RESONANCE_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Capacitive (n̂⊗n̂) and inductive (φ̂⊗φ̂) couplings in GHz.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingSpec {
    pub g_c: f64,
    pub g_l: f64,
}

impl CouplingSpec {
    pub fn capacitive(g_c: f64) -> Self {
        Self { g_c, g_l: 0.0 }
    }

    pub fn inductive(g_l: f64) -> Self {
        Self { g_c: 0.0, g_l }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self { g_c: self.g_c * s, g_l: self.g_l * s }
    }

    /// Lattice assembly needs exactly one coupling channel.
    pub fn require_single(&self) -> Result<()> {
        match (self.g_c != 0.0, self.g_l != 0.0) {
            (true, false) | (false, true) => Ok(()),
            _ => Err(Error::invalid("exactly one of g_c, g_l must be nonzero for a lattice model")),
        }
    }
}
