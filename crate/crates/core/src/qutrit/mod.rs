//! Qutrit selection, effective single-atom constants and coherence estimates.

mod coherence;
mod extract;
mod resonance;
mod sweep;
pub mod table;

pub use coherence::{dielectric_rate, flux_dephasing_time, flux_dephasing_time_in, Dephasing, DielectricLoss};
pub use extract::{classify_transition, extract_qutrit, DEFAULT_SCAN_LEVELS};
pub use resonance::{anharmonicity, find_resonant_flux, find_resonant_flux_in, Resonance, RESONANCE_TOL};
pub use sweep::{
    choose_root, sweep_parameters, RootChoice, RowStatus, SweepAxis, SweepGrid, SweepRequest, SweepRow, TRANSITIONS,
};

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Which atom levels play the roles of |0⟩, |1⟩, |2⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelPolicy {
    /// 0̄, 1̄, 2̄
    LowestThree,
    /// 0̄, 1̄, 3̄
    SkipSecond,
}

impl LevelPolicy {
    pub fn levels(self) -> [usize; 3] {
        match self {
            LevelPolicy::LowestThree => [0, 1, 2],
            LevelPolicy::SkipSecond => [0, 1, 3],
        }
    }
}

impl FromStr for LevelPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "lowest-three" => Ok(LevelPolicy::LowestThree),
            "skip-second" => Ok(LevelPolicy::SkipSecond),
            other => Err(Error::invalid(format!("unknown level policy '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Plasmon,
    Fluxon,
}

impl Regime {
    pub fn letter(self) -> char {
        match self {
            Regime::Plasmon => 'P',
            Regime::Fluxon => 'F',
        }
    }
}

/// Magnitudes of the qutrit matrix elements that feed the lattice model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QutritElements {
    pub n10: f64,
    pub n21: f64,
    pub n20: f64,
    pub phi10: f64,
    pub phi21: f64,
    pub phi20: f64,
    /// ⟨a|φ|a⟩ for a = 0, 1, 2.
    pub phi_diag: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QutritDescriptor {
    pub levels: [usize; 3],
    pub omega10: f64,
    pub omega21: f64,
    /// Δ = ω21 − ω10
    pub delta_hubbard: f64,
    /// δ = min ||ω_āb| − ω10| over ā outside and b inside the qutrit.
    pub delta_protect: f64,
    /// |ω_āb| − ω10 for the minimizing pair (sign shows which side).
    pub delta_protect_signed: f64,
    /// (ā, b) realizing δ.
    pub offending: (usize, usize),
    pub alpha: f64,
    /// α from phase matrix elements (inductive coupling).
    pub alpha_inductive: f64,
    pub p_over_j_cap: f64,
    pub p_over_j_ind: f64,
    pub w1: f64,
    pub w2: f64,
    pub regime_01: Regime,
    pub regime_12: Regime,
    pub elements: QutritElements,
}

impl QutritDescriptor {
    pub fn regime_label(&self) -> String {
        format!("{}{}", self.regime_01.letter(), self.regime_12.letter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceParams {
    /// K
    pub temperature: f64,
    pub loss_tangent_amp: f64,
    pub loss_tangent_exp: f64,
    /// GHz
    pub loss_tangent_pivot: f64,
    /// Flux-noise amplitude in units of Φ0.
    pub flux_noise_amp: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl Default for CoherenceParams {
    fn default() -> Self {
        Self {
            temperature: 0.020,
            loss_tangent_amp: 2e-6,
            loss_tangent_exp: 0.15,
            loss_tangent_pivot: 6.0,
            flux_noise_amp: 1e-6,
            hbar: crate::units::HBAR,
            k_b: crate::units::K_B,
        }
    }
}

impl CoherenceParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.temperature > 0.0) {
            return Err(Error::invalid("temperature must be positive"));
        }
        if self.loss_tangent_amp < 0.0 || self.flux_noise_amp < 0.0 {
            return Err(Error::invalid("noise amplitudes must be non-negative"));
        }
        if !(self.loss_tangent_pivot > 0.0 && self.hbar > 0.0 && self.k_b > 0.0) {
            return Err(Error::invalid("pivot frequency and constants must be positive"));
        }
        Ok(())
    }
}
