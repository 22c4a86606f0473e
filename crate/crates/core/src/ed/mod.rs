//! Exact diagonalization of the constrained (ρ ≤ 2) boson chain in a fixed
//! particle-number sector: basis, Hamiltonian, ground states, correlators,
//! quench dynamics and closed-form checks.

mod alpha0;
mod basis;
mod correlators;
mod gauge;
mod hamiltonian;
mod lanczos;
mod propagate;
mod stability;

pub use alpha0::{alpha0_ground_sector, e_tg, e_well, exact_alpha0_energy, Alpha0Ground};
pub use basis::{sector_dimension, SectorBasis, MAX_SITES};
pub use correlators::{correlators, Correlators};
pub use gauge::{sublattice_gauge_check, GaugeReport, GAUGE_DENSE_LIMIT};
pub use hamiltonian::{build_hamiltonian, HamiltonianOperator, MatrixFreeHamiltonian, SparseHamiltonian};
pub use lanczos::{lowest_eigenpair, EigenOptions, Eigenpair, DEFAULT_DENSE_THRESHOLD};
pub use propagate::{time_evolve, PropagationOptions, Trajectory};
pub use stability::stability_check;

use crate::effective::LatticeModel;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

/// Sectors above this dimension are solved without storing the matrix.
pub const MATRIX_FREE_THRESHOLD: usize = 2_000_000;

#[derive(Clone, Debug)]
pub struct SectorState {
    pub basis: Arc<SectorBasis>,
    pub amplitudes: Vec<Complex64>,
}

impl SectorState {
    /// Unit-norm Fock state with the given occupations.
    pub fn fock(basis: Arc<SectorBasis>, occupations: &[u8]) -> Result<Self> {
        let i = basis.index_of_occupations(occupations)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    pub fn from_real(basis: Arc<SectorBasis>, v: &[f64]) -> Result<Self> {
        if v.len() != basis.dim() {
            return Err(Error::invalid("vector length does not match the sector"));
        }
        Ok(Self { basis, amplitudes: v.iter().map(|&x| Complex64::new(x, 0.0)).collect() })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn site_average(&self, f: impl Fn(u8) -> f64) -> Vec<f64> {
        let b = &self.basis;
        let mut out = vec![0.0; b.n_sites()];
        for (i, z) in self.amplitudes.iter().enumerate() {
            let p = z.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let s = b.state(i);
            for (j, o) in out.iter_mut().enumerate() {
                *o += p * f(b.occ(s, j));
            }
        }
        out
    }

    /// ⟨n̂_j⟩
    pub fn density(&self) -> Vec<f64> {
        self.site_average(|r| r as f64)
    }

    /// ⟨n̂_p(j)⟩ with n̂_p = ½(b†)²b², i.e. the probability that j holds a pair.
    pub fn pair_density(&self) -> Vec<f64> {
        self.site_average(|r| if r == 2 { 1.0 } else { 0.0 })
    }

    pub fn mean_pair_number(&self) -> f64 {
        self.pair_density().iter().sum()
    }

    pub fn total_number(&self) -> f64 {
        self.density().iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: SectorState,
    pub residual: f64,
}

/// Lowest eigenpair of `op`, which must act on `basis`.
pub fn ground_state<O: HamiltonianOperator + ?Sized>(
    op: &O,
    basis: Arc<SectorBasis>,
    opts: &EigenOptions,
) -> Result<GroundState> {
    if op.dim() != basis.dim() {
        return Err(Error::invalid("operator and basis dimensions differ"));
    }
    let pair = lowest_eigenpair(op, opts)?;
    Ok(GroundState { energy: pair.value, state: SectorState::from_real(basis, &pair.vector)?, residual: pair.residual })
}

/// Builds the sector and solves it, switching to the matrix-free operator
/// for very large sectors.
pub fn solve_ground_state(model: &LatticeModel, n_particles: usize, opts: &EigenOptions) -> Result<GroundState> {
    let basis = Arc::new(SectorBasis::new(model.n_sites, n_particles)?);
    if basis.dim() > MATRIX_FREE_THRESHOLD {
        let op = MatrixFreeHamiltonian::new(model, &basis)?;
        ground_state(&op, basis.clone(), opts)
    } else {
        let h = build_hamiltonian(model, &basis)?;
        ground_state(&h, basis, opts)
    }
}
