use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CouplingSpec;
use crate::circuit::Spectrum;
use crate::error::{Error, Result};
use crate::linalg::eigvalsh_sorted;

/// 9×9 two-qutrit Hamiltonian in the frame rotating at ω10 per photon.
/// Row/column (a, c) ↦ 3a + c, atom A first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQutritMatrix {
    pub entries: DMatrix<Complex64>,
    pub rwa_only: bool,
    /// Lab energy of |00⟩ and the frame frequency; lab = rotating + e00 + N·ω10.
    pub e00: f64,
    pub omega10: f64,
}

pub(crate) fn pair_index(a: usize, c: usize) -> usize {
    3 * a + c
}

impl TwoQutritMatrix {
    pub fn get(&self, ac: (usize, usize), bd: (usize, usize)) -> Complex64 {
        self.entries[(pair_index(ac.0, ac.1), pair_index(bd.0, bd.1))]
    }

    /// Pair indices with total photon number `n` (0..=4).
    pub fn block(n: usize) -> Vec<usize> {
        (0..9).filter(|&i| i / 3 + i % 3 == n).collect()
    }

    pub fn block_eigenvalues(&self, n: usize) -> Vec<f64> {
        let idx = Self::block(n);
        let m = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.entries[(idx[i], idx[j])]);
        eigvalsh_sorted(m)
    }

    pub fn lab_block_eigenvalues(&self, n: usize) -> Vec<f64> {
        let shift = self.e00 + n as f64 * self.omega10;
        self.block_eigenvalues(n).into_iter().map(|e| e + shift).collect()
    }

    /// Largest element connecting different photon-number blocks.
    pub fn number_block_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..9 {
            for j in 0..9 {
                if i / 3 + i % 3 != j / 3 + j % 3 {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn with_correction(&self, delta: &DMatrix<Complex64>) -> TwoQutritMatrix {
        TwoQutritMatrix { entries: &self.entries + delta, rwa_only: false, ..self.clone() }
    }
}

fn check_levels(s: &Spectrum, levels: [usize; 3]) -> Result<()> {
    if levels[2] >= s.n_levels() {
        return Err(Error::Policy(format!("spectrum has only {} levels", s.n_levels())));
    }
    Ok(())
}

/// RWA two-qutrit matrix for two atoms with the same level assignment.
pub fn build_two_qutrit_rwa(
    atom_a: &Spectrum,
    atom_b: &Spectrum,
    levels: [usize; 3],
    c: &CouplingSpec,
) -> Result<TwoQutritMatrix> {
    check_levels(atom_a, levels)?;
    check_levels(atom_b, levels)?;
    let q = levels;
    let detuning = |s: &Spectrum, a: usize, w: f64| s.energies[q[a]] - s.energies[q[0]] - a as f64 * w;
    let omega10 = atom_a.energies[q[1]] - atom_a.energies[q[0]];
    let mut h = DMatrix::<Complex64>::zeros(9, 9);
    for a in 0..3 {
        for cc in 0..3 {
            let i = pair_index(a, cc);
            h[(i, i)] += detuning(atom_a, a, omega10) + detuning(atom_b, cc, omega10);
            for b in 0..3 {
                for d in 0..3 {
                    if a + cc != b + d {
                        continue;
                    }
                    let j = pair_index(b, d);
                    h[(i, j)] += atom_a.n(q[a], q[b]) * atom_b.n(q[cc], q[d]) * c.g_c
                        + atom_a.phi(q[a], q[b]) * atom_b.phi(q[cc], q[d]) * c.g_l;
                }
            }
        }
    }
    Ok(TwoQutritMatrix { entries: h, rwa_only: true, e00: atom_a.energies[q[0]] + atom_b.energies[q[0]], omega10 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub j: f64,
    pub p: f64,
    pub delta: f64,
    /// None when |J| < 1e-12.
    pub alpha: Option<f64>,
    pub alpha_prime: Option<f64>,
    pub dw1_sq: f64,
    pub dw2_sq: f64,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
}

/// Lattice constants read off the two-qutrit matrix; the Hamiltonian's
/// −J and −P/2·2 conventions give J = −H_{01,10} and P = −H_{02,20}.
pub fn extract_effective_params(h: &TwoQutritMatrix) -> Result<EffectiveParams> {
    if crate::linalg::hermitian_defect(&h.entries) > 1e-9 * h.entries.norm().max(1.0) {
        return Err(Error::invalid("two-qutrit matrix is not Hermitian"));
    }
    let re = |ac, bd| h.get(ac, bd).re;
    let j = -h.get((0, 1), (1, 0)).re;
    let p = -h.get((0, 2), (2, 0)).re;
    let dw_sq = |r: usize| re((r, r), (r, r)) - 2.0 * re((0, r), (0, r)) + re((0, 0), (0, 0));
    let delta = re((2, 0), (2, 0)) - re((0, 0), (0, 0)) - 2.0 * (re((1, 0), (1, 0)) - re((0, 0), (0, 0)));
    let defined = j.abs() >= 1e-12;
    let alpha = defined.then(|| h.get((1, 1), (2, 0)).norm() / (SQRT_2 * j.abs()));
    let alpha_prime = defined.then(|| (h.get((2, 1), (1, 2)).norm() / (2.0 * j.abs())).sqrt());
    let (dw1_sq, dw2_sq) = (dw_sq(1), dw_sq(2));
    let denom = j + p;
    let w = |x: f64| (denom.abs() >= 1e-12).then(|| -x / denom);
    Ok(EffectiveParams { j, p, delta, alpha, alpha_prime, dw1_sq, dw2_sq, w1: w(dw1_sq), w2: w(dw2_sq) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{diagonalize_fluxonium, CircuitSpec};
    use crate::qutrit::{extract_qutrit, LevelPolicy};

    fn pp() -> Spectrum {
        diagonalize_fluxonium(&CircuitSpec::new(0.6, 2.2, 1.5, 0.41317202), 16, 150).unwrap()
    }

    #[test]
    fn decoupled_is_diagonal() {
        let s = pp();
        let h = build_two_qutrit_rwa(&s, &s, [0, 1, 2], &CouplingSpec::default()).unwrap();
        let delta = s.energies[2] - 2.0 * s.energies[1] + s.energies[0];
        for a in 0..3 {
            for c in 0..3 {
                let expect = delta * ((a == 2) as u8 + (c == 2) as u8) as f64;
                assert!((h.get((a, c), (a, c)).re - expect).abs() < 1e-12);
            }
        }
        assert_eq!(h.entries.iter().filter(|z| z.norm() > 0.0 && z.im != 0.0).count(), 0);
    }

    #[test]
    fn hopping_entry_and_block_structure() {
        let s = pp();
        let g = 0.05;
        let h = build_two_qutrit_rwa(&s, &s, [0, 1, 2], &CouplingSpec::capacitive(g)).unwrap();
        let n10 = s.n(1, 0).norm();
        assert!((h.get((0, 1), (1, 0)).re - g * n10 * n10).abs() < 1e-14);
        let p = extract_effective_params(&h).unwrap();
        assert!((p.j + g * n10 * n10).abs() < 1e-14);
        assert!(h.number_block_defect() < 1e-12);
    }

    #[test]
    fn round_trip_with_descriptor() {
        let s = pp();
        let d = extract_qutrit(&s, LevelPolicy::LowestThree, 8).unwrap();
        let h = build_two_qutrit_rwa(&s, &s, d.levels, &CouplingSpec::capacitive(0.03)).unwrap();
        let p = extract_effective_params(&h).unwrap();
        assert!((p.alpha.unwrap() - d.alpha).abs() < 1e-12);
        assert!((p.alpha_prime.unwrap() - d.alpha).abs() < 1e-12);
        assert!((p.p / p.j - d.p_over_j_cap).abs() < 1e-12);
        assert!((p.delta - d.delta_hubbard).abs() < 1e-12);

        let hl = build_two_qutrit_rwa(&s, &s, d.levels, &CouplingSpec::inductive(0.03)).unwrap();
        let pl = extract_effective_params(&hl).unwrap();
        assert!((pl.w1.unwrap() - d.w1).abs() < 1e-10 * d.w1);
        assert!((pl.w2.unwrap() - d.w2).abs() < 1e-10 * d.w2);
    }

    #[test]
    fn diagonal_input_gives_second_differences() {
        let mut h = build_two_qutrit_rwa(&pp(), &pp(), [0, 1, 2], &CouplingSpec::default()).unwrap();
        for i in 0..9 {
            h.entries[(i, i)] = Complex64::new((i * i) as f64 * 0.1, 0.0);
        }
        let p = extract_effective_params(&h).unwrap();
        assert_eq!((p.j, p.p), (0.0, 0.0));
        assert!(p.alpha.is_none());
        let d = |a: usize, c: usize| ((3 * a + c).pow(2)) as f64 * 0.1;
        assert!((p.dw1_sq - (d(1, 1) - 2.0 * d(0, 1) + d(0, 0))).abs() < 1e-12);
        assert!((p.dw2_sq - (d(2, 2) - 2.0 * d(0, 2) + d(0, 0))).abs() < 1e-12);
    }
}
