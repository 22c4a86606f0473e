use super::{build_hamiltonian, HamiltonianOperator, SectorBasis};
use crate::effective::{Boundary, LatticeModel};
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh_sorted, max_abs_diff};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// The check compares dense spectra, so sectors are capped at this size.
pub const GAUGE_DENSE_LIMIT: usize = 2500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeReport {
    pub n_particles: usize,
    pub dim: usize,
    /// max |E_k(J) − E_k(−J)|
    pub hop_spectrum_deviation: f64,
    /// max |(U H(J) U)_st − H(−J)_st| with U = (−1)^{N_A}
    pub hop_map_defect: f64,
    /// Same two checks for P → −P on the J = 0 model with U = i^{N_A}.
    pub pair_spectrum_deviation: f64,
    pub pair_map_defect: f64,
}

impl GaugeReport {
    pub fn max_deviation(&self) -> f64 {
        self.hop_spectrum_deviation.max(self.hop_map_defect).max(self.pair_spectrum_deviation).max(self.pair_map_defect)
    }
}

/// Phase i^k per basis state, k = particles on sublattice A, applied as
/// U H U† and compared entrywise with `target`.
fn map_defect(h: &nalgebra::DMatrix<f64>, target: &nalgebra::DMatrix<f64>, na: &[u32], step: u32) -> f64 {
    let phase = |k: u32| Complex64::i().powu(k * step);
    let mut worst = 0.0f64;
    for s in 0..h.nrows() {
        for t in 0..h.ncols() {
            let v = phase(na[s]) * h[(s, t)] * phase(na[t]).conj();
            worst = worst.max((v - target[(s, t)]).norm());
        }
    }
    worst
}

/// Sign of J (and of P at J = 0) is a gauge choice on bipartite lattices.
pub fn sublattice_gauge_check(model: &LatticeModel, n_particles: usize) -> Result<GaugeReport> {
    model.validate()?;
    if model.boundary == Boundary::Periodic && model.n_sites % 2 == 1 {
        return Err(Error::Precondition(format!("odd ring of {} sites is frustrated", model.n_sites)));
    }
    let colour = model.sublattices().ok_or_else(|| Error::Precondition("bond graph is not bipartite".into()))?;
    let basis = SectorBasis::new(model.n_sites, n_particles)?;
    if basis.dim() > GAUGE_DENSE_LIMIT {
        return Err(Error::Precondition(format!(
            "sector dimension {} exceeds the dense limit {GAUGE_DENSE_LIMIT}",
            basis.dim()
        )));
    }
    let na: Vec<u32> = (0..basis.dim())
        .map(|i| {
            let s = basis.state(i);
            (0..model.n_sites).filter(|&j| colour[j] == 0).map(|j| basis.occ(s, j) as u32).sum()
        })
        .collect();
    let dense = |m: &LatticeModel| build_hamiltonian(m, &basis).map(|h| h.to_dense());

    let h_pos = dense(model)?;
    let h_neg = dense(&LatticeModel { j_hop: -model.j_hop, ..model.clone() })?;
    let hop_map_defect = map_defect(&h_pos, &h_neg, &na, 2);
    let hop_spectrum_deviation = max_abs_diff(&eigvalsh_sorted(h_pos), &eigvalsh_sorted(h_neg));

    let zero_j = LatticeModel { j_hop: 0.0, ..model.clone() };
    let p_pos = dense(&zero_j)?;
    let p_neg = dense(&LatticeModel { p_hop: -model.p_hop, ..zero_j })?;
    let pair_map_defect = map_defect(&p_pos, &p_neg, &na, 1);
    let pair_spectrum_deviation = max_abs_diff(&eigvalsh_sorted(p_pos), &eigvalsh_sorted(p_neg));

    Ok(GaugeReport {
        n_particles,
        dim: basis.dim(),
        hop_spectrum_deviation,
        hop_map_defect,
        pair_spectrum_deviation,
        pair_map_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_chain_equivalence() {
        let m = LatticeModel { alpha: 1.3, p_hop: 0.5, delta: 0.4, dw1: 0.2, ..LatticeModel::chain(6, Boundary::Open) };
        let r = sublattice_gauge_check(&m, 3).unwrap();
        assert!(r.max_deviation() < 1e-10, "{r:?}");
    }

    #[test]
    fn pair_sign_is_not_a_gauge_with_hopping() {
        // with J ≠ 0 the P → −P map fails: the spectra differ
        let m = LatticeModel { alpha: 1.0, p_hop: 0.8, ..LatticeModel::chain(4, Boundary::Periodic) };
        let b = SectorBasis::new(4, 2).unwrap();
        let e1 = eigvalsh_sorted(build_hamiltonian(&m, &b).unwrap().to_dense());
        let e2 = eigvalsh_sorted(build_hamiltonian(&LatticeModel { p_hop: -0.8, ..m }, &b).unwrap().to_dense());
        assert!(max_abs_diff(&e1, &e2) > 1e-3);
    }

    #[test]
    fn frustrated_rings_rejected() {
        let m = LatticeModel::chain(5, Boundary::Periodic);
        assert!(matches!(sublattice_gauge_check(&m, 2), Err(Error::Precondition(_))));
        let tri = LatticeModel { bonds: vec![(0, 1), (1, 2), (2, 0)], ..LatticeModel::chain(3, Boundary::Open) };
        assert!(matches!(sublattice_gauge_check(&tri, 2), Err(Error::Precondition(_))));
    }
}
