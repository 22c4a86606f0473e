use super::SectorState;
use crate::effective::Boundary;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Two-point functions versus distance r. On rings every quantity is
/// averaged over the reference site; on open chains the reference is site 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlators {
    pub distance: Vec<usize>,
    /// ⟨b†_r b_0⟩
    pub g1: Vec<f64>,
    /// ⟨(b†_r)² b_0²⟩
    pub g1_pair: Vec<f64>,
    /// ⟨n̂_r n̂_0⟩
    pub density_density: Vec<f64>,
    /// L⟨n̂_p(0) n̂_p(r)⟩
    pub pair_density: Vec<f64>,
    pub mean_pair_number: f64,
}

/// ⟨b†_a b_c⟩ (power 1) or ⟨(b†_a)² b_c²⟩ (power 2) for a ≠ c.
fn transfer(state: &SectorState, a: usize, c: usize, power: u8) -> f64 {
    let b = &state.basis;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &psi) in state.amplitudes.iter().enumerate() {
        if psi == Complex64::new(0.0, 0.0) {
            continue;
        }
        let s = b.state(i);
        let (ra, rc) = (b.occ(s, a), b.occ(s, c));
        if rc < power || ra + power > 2 {
            continue;
        }
        let coef: f64 = (0..power).map(|k| (((rc - k) as f64) * ((ra + k + 1) as f64)).sqrt()).product();
        let t = b.with_occ(b.with_occ(s, a, ra + power), c, rc - power);
        if let Some(j) = b.index_of(t) {
            acc += state.amplitudes[j].conj() * psi * coef;
        }
    }
    acc.re
}

fn diagonal(state: &SectorState, f: impl Fn(u8, u8) -> f64, a: usize, c: usize) -> f64 {
    let b = &state.basis;
    state.amplitudes.iter().enumerate().map(|(i, z)| z.norm_sqr() * f(b.occ(b.state(i), a), b.occ(b.state(i), c))).sum()
}

pub fn correlators(state: &SectorState, boundary: Boundary) -> Correlators {
    let l = state.basis.n_sites();
    let (r_max, refs): (usize, Vec<usize>) = match boundary {
        Boundary::Periodic => (l / 2, (0..l).collect()),
        Boundary::Open => (l - 1, vec![0]),
    };
    let pair = |r: u8| if r == 2 { 1.0 } else { 0.0 };
    let mut out = Correlators {
        distance: (0..=r_max).collect(),
        g1: Vec::new(),
        g1_pair: Vec::new(),
        density_density: Vec::new(),
        pair_density: Vec::new(),
        mean_pair_number: state.mean_pair_number(),
    };
    let nref = refs.len() as f64;
    for r in 0..=r_max {
        let (mut g1, mut g2, mut nn, mut pp) = (0.0, 0.0, 0.0, 0.0);
        for &j in &refs {
            let k = (j + r) % l;
            if r == 0 {
                g1 += diagonal(state, |x, _| x as f64, j, j);
                g2 += diagonal(state, |x, _| (x as f64) * (x as f64 - 1.0), j, j);
            } else {
                g1 += transfer(state, k, j, 1);
                g2 += transfer(state, k, j, 2);
            }
            nn += diagonal(state, |x, y| x as f64 * y as f64, j, k);
            pp += diagonal(state, |x, y| pair(x) * pair(y), j, k);
        }
        out.g1.push(g1 / nref);
        out.g1_pair.push(g2 / nref);
        out.density_density.push(nn / nref);
        out.pair_density.push(l as f64 * pp / nref);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::{solve_ground_state, EigenOptions, SectorBasis};
    use crate::effective::LatticeModel;
    use std::sync::Arc;

    #[test]
    fn fock_states_have_no_coherence() {
        let b = Arc::new(SectorBasis::new(6, 5).unwrap());
        let s = SectorState::fock(b, &[2, 0, 1, 1, 0, 1]).unwrap();
        for bc in [Boundary::Open, Boundary::Periodic] {
            let c = correlators(&s, bc);
            assert!(c.g1[1..].iter().chain(&c.g1_pair[1..]).all(|&x| x == 0.0));
        }
        let c = correlators(&s, Boundary::Open);
        assert_eq!(c.density_density[0], 4.0);
        assert_eq!(c.pair_density[0], 6.0);
    }

    #[test]
    fn ring_sum_rules() {
        let m = LatticeModel { alpha: 0.8, p_hop: 0.6, ..LatticeModel::chain(6, Boundary::Periodic) };
        let g = solve_ground_state(&m, 4, &EigenOptions::default()).unwrap();
        let c = correlators(&g.state, Boundary::Periodic);
        let n = 4.0 / 6.0;
        assert!((c.g1[0] - n).abs() < 1e-10);
        // Σ_r ⟨n_r n_0⟩ over the whole ring = N·n
        let full: f64 = (0..6).map(|r| c.density_density[r.min(6 - r)]).sum();
        assert!((full - 4.0 * n).abs() < 1e-10);
        assert!((c.pair_density[0] - c.mean_pair_number).abs() < 1e-10);
    }

    #[test]
    fn dimer_coherence_by_hand() {
        // ground state (1, √2, 1)/2 on (2,0),(1,1),(0,2)
        let b = Arc::new(SectorBasis::new(2, 2).unwrap());
        let v = [0.5, 0.5 * 2f64.sqrt(), 0.5];
        let s = SectorState::from_real(b, &v).unwrap();
        let c = correlators(&s, Boundary::Open);
        // ⟨b†_1 b_0⟩ = 2·(√2/2)(1/2)·√2 = 1; ⟨(b†_1)²b_0²⟩ = (1/2)(1/2)·2
        assert!((c.g1[1] - 1.0).abs() < 1e-14);
        assert!((c.g1_pair[1] - 0.5).abs() < 1e-14);
    }
}
