use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{rwa::pair_index, CouplingSpec};
use crate::circuit::Spectrum;
use crate::error::{Error, Result};

pub const DEFAULT_LEVEL_CUTOFF: usize = 12;
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcludedPair {
    pub r: usize,
    pub s: usize,
    pub denominator: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwCorrection {
    /// Hermitian 9×9 δH, block diagonal in photon number.
    pub delta: DMatrix<Complex64>,
    /// Near-resonant intermediate pairs outside the qutrit product space.
    pub excluded: Vec<ExcludedPair>,
    /// Fraction of |numerator| weight carried by `excluded`.
    pub excluded_weight: f64,
}

/// Second-order correction from virtual processes through non-qutrit (or
/// number-changing) intermediate states:
/// δH_{ac,bd} = Σ_{rs} V_{ac,rs} V_{rs,bd} / (E_a + E_c − E_r − E_s),
/// with V = g_C n⊗n + g_L φ⊗φ and near-resonant pairs skipped.
pub fn schrieffer_wolff_correction(
    atom_a: &Spectrum,
    atom_b: &Spectrum,
    levels: [usize; 3],
    c: &CouplingSpec,
    level_cutoff: usize,
    resonance_tol: f64,
) -> Result<SwCorrection> {
    if level_cutoff < 8 {
        return Err(Error::invalid(format!("level_cutoff must be >= 8, got {level_cutoff}")));
    }
    if atom_a.n_levels() < level_cutoff || atom_b.n_levels() < level_cutoff {
        return Err(Error::invalid(format!("spectra must carry at least {level_cutoff} levels")));
    }
    let q = levels;
    let k = level_cutoff;
    let v = |a: usize, cc: usize, r: usize, s: usize| {
        atom_a.n(a, r) * atom_b.n(cc, s) * c.g_c + atom_a.phi(a, r) * atom_b.phi(cc, s) * c.g_l
    };
    let ea = &atom_a.energies;
    let eb = &atom_b.energies;

    let mut delta = DMatrix::<Complex64>::zeros(9, 9);
    let mut excluded: Vec<ExcludedPair> = Vec::new();
    let (mut w_total, mut w_excluded) = (0.0, 0.0);

    for r in 0..k {
        for s in 0..k {
            let outside = !(q.contains(&r) && q.contains(&s));
            let mut closest: Option<f64> = None;
            for a in 0..3 {
                for cc in 0..3 {
                    let den = ea[q[a]] + eb[q[cc]] - ea[r] - eb[s];
                    let left = v(q[a], q[cc], r, s);
                    for b in 0..3 {
                        for d in 0..3 {
                            if a + cc != b + d {
                                continue;
                            }
                            let num = left * v(r, s, q[b], q[d]);
                            if outside {
                                w_total += num.norm();
                            }
                            if den.abs() <= resonance_tol {
                                if outside && num.norm() > 0.0 {
                                    w_excluded += num.norm();
                                    closest =
                                        Some(closest.map_or(den, |x: f64| if den.abs() < x.abs() { den } else { x }));
                                }
                                continue;
                            }
                            delta[(pair_index(a, cc), pair_index(b, d))] += num / den;
                        }
                    }
                }
            }
            if let Some(denominator) = closest {
                log::debug!("excluding near-resonant intermediate pair ({r}, {s}), denominator {denominator:.3e} GHz");
                excluded.push(ExcludedPair { r, s, denominator });
            }
        }
    }
    let excluded_weight = if w_total > 0.0 { w_excluded / w_total } else { 0.0 };
    if excluded_weight > 0.1 {
        log::warn!(
            "near-degenerate intermediate states carry {:.1}% of the second-order weight; the correction is unreliable",
            100.0 * excluded_weight
        );
    }
    let delta = (&delta + delta.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(SwCorrection { delta, excluded, excluded_weight })
}
