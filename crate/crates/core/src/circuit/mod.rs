//! Single-atom circuit Hamiltonians and their spectra.

mod fluxonium;
mod periodic;

pub use fluxonium::{diagonalize_fluxonium, FluxoniumBasis, DEFAULT_BASIS_SIZE, DEFAULT_LEVELS};
pub use periodic::{charge_dispersion, diagonalize_periodic, hhjj_potential, DEFAULT_CHARGE_CUTOFF};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fluxonium (or, with `e_l = 0`, a plain junction) in linear GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub e_c: f64,
    pub e_j: f64,
    pub e_l: f64,
    /// External flux in units of the flux quantum.
    pub flux: f64,
}

impl CircuitSpec {
    pub fn new(e_c: f64, e_j: f64, e_l: f64, flux: f64) -> Self {
        Self { e_c, e_j, e_l, flux }
    }

    pub fn with_flux(self, flux: f64) -> Self {
        Self { flux, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.e_c, self.e_j, self.e_l, self.flux].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("circuit parameters must be finite"));
        }
        if self.e_c <= 0.0 {
            return Err(Error::invalid(format!("e_c must be positive, got {}", self.e_c)));
        }
        if self.e_j < 0.0 || self.e_l < 0.0 {
            return Err(Error::invalid("e_j and e_l must be non-negative"));
        }
        Ok(())
    }

    /// Small-oscillation plasma frequency sqrt(8 E_C E_L).
    pub fn harmonic_frequency(&self) -> f64 {
        (8.0 * self.e_c * self.e_l).sqrt()
    }
}

/// Junction pair with multi-channel (higher-harmonic) current-phase relations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HhjjSpec {
    /// Superconducting gap Δ̃ in GHz.
    pub gap: f64,
    pub transmissions_a: Vec<f64>,
    pub transmissions_b: Vec<f64>,
    pub flux: f64,
    pub charge_bias: f64,
}

impl HhjjSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap > 0.0) || !self.gap.is_finite() {
            return Err(Error::invalid(format!("gap must be positive, got {}", self.gap)));
        }
        for &t in self.transmissions_a.iter().chain(&self.transmissions_b) {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!("transmission {t} outside [0, 1]")));
            }
        }
        if !self.flux.is_finite() || !self.charge_bias.is_finite() {
            return Err(Error::invalid("flux and charge bias must be finite"));
        }
        Ok(())
    }

    pub fn with_charge_bias(&self, n_g: f64) -> Self {
        Self { charge_bias: n_g, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Fluxonium,
    /// Phase matrix elements are taken with φ restricted to one 2π cell.
    PeriodicCellPhase,
}

/// Lowest levels of one atom with phase and charge matrix elements.
///
/// For the fluxonium the gauge is fixed so that wavefunctions are real:
/// `phi_elems` is then real and `n_elems` purely imaginary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub phi_elems: DMatrix<Complex64>,
    pub n_elems: DMatrix<Complex64>,
    pub basis_size: usize,
    pub converged: bool,
    pub e_c: f64,
    pub kind: SpectrumKind,
}

impl Spectrum {
    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    /// ω_ab = E_a − E_b, the convention of the commutator identity.
    pub fn omega(&self, a: usize, b: usize) -> f64 {
        self.energies[a] - self.energies[b]
    }

    pub fn phi(&self, a: usize, b: usize) -> Complex64 {
        self.phi_elems[(a, b)]
    }

    pub fn n(&self, a: usize, b: usize) -> Complex64 {
        self.n_elems[(a, b)]
    }

    /// ⟨a|φ|a⟩.
    pub fn mean_phase(&self, a: usize) -> f64 {
        self.phi_elems[(a, a)].re
    }

    /// Largest violation of ω_ab φ_ab = −8i E_C n_ab over all kept pairs,
    /// relative to |8 E_C n_ab|. Elements that vanish by symmetry are measured
    /// against a floor of 1e-6 of the largest element instead.
    pub fn gauge_identity_defect(&self) -> f64 {
        let n = self.n_levels();
        let n_max = self.n_elems.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let floor = 1e-6 * 8.0 * self.e_c * n_max;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let rhs = Complex64::new(0.0, -8.0 * self.e_c) * self.n(a, b);
                let lhs = self.phi(a, b) * self.omega(a, b);
                let scale = rhs.norm().max(floor).max(1e-12);
                worst = worst.max((lhs - rhs).norm() / scale);
            }
        }
        worst
    }

    /// Same spectrum restricted to its lowest `k` levels.
    pub fn truncated(&self, k: usize) -> Spectrum {
        let k = k.min(self.n_levels());
        Spectrum {
            energies: self.energies[..k].to_vec(),
            phi_elems: self.phi_elems.view((0, 0), (k, k)).into_owned(),
            n_elems: self.n_elems.view((0, 0), (k, k)).into_owned(),
            ..self.clone()
        }
    }
}
