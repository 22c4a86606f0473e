use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CouplingSpec;
use crate::circuit::Spectrum;
use crate::error::{Error, Result};
use crate::linalg::{eigh_sorted, eigvalsh_sorted, max_abs_diff};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullTwoAtomOptions {
    pub levels_per_atom: usize,
    /// Truncation used for the convergence check (None skips it).
    pub check_levels: Option<usize>,
    /// Allowed shift of the kept eigenvalues under the larger truncation (GHz).
    pub check_tol: f64,
}

impl Default for FullTwoAtomOptions {
    fn default() -> Self {
        Self { levels_per_atom: 12, check_levels: Some(16), check_tol: 1e-4 }
    }
}

fn product_hamiltonian(a: &Spectrum, b: &Spectrum, c: &CouplingSpec, k: usize) -> DMatrix<Complex64> {
    let dim = k * k;
    DMatrix::from_fn(dim, dim, |i, j| {
        let (ia, ib) = (i / k, i % k);
        let (ja, jb) = (j / k, j % k);
        let mut h = a.n(ia, ja) * b.n(ib, jb) * c.g_c + a.phi(ia, ja) * b.phi(ib, jb) * c.g_l;
        if i == j {
            h += a.energies[ia] + b.energies[ib];
        }
        h
    })
}

fn require_levels(a: &Spectrum, b: &Spectrum, k: usize) -> Result<()> {
    if a.n_levels() < k || b.n_levels() < k {
        return Err(Error::invalid(format!("spectra must carry at least {k} levels")));
    }
    Ok(())
}

/// Lowest `keep` eigenvalues of H_a⊗1 + 1⊗H_b + g_C n⊗n + g_L φ⊗φ in the
/// truncated product basis.
pub fn full_two_atom_diagonalization(
    atom_a: &Spectrum,
    atom_b: &Spectrum,
    c: &CouplingSpec,
    keep: usize,
    opts: &FullTwoAtomOptions,
) -> Result<Vec<f64>> {
    let k = opts.levels_per_atom;
    require_levels(atom_a, atom_b, k)?;
    if keep > k * k {
        return Err(Error::invalid(format!("cannot keep {keep} of {} product levels", k * k)));
    }
    let mut vals = eigvalsh_sorted(product_hamiltonian(atom_a, atom_b, c, k));
    vals.truncate(keep);
    if let Some(k2) = opts.check_levels {
        require_levels(atom_a, atom_b, k2)?;
        let mut reference = eigvalsh_sorted(product_hamiltonian(atom_a, atom_b, c, k2));
        reference.truncate(keep);
        let shift = max_abs_diff(&vals, &reference);
        if shift > opts.check_tol {
            return Err(Error::Truncation { shift, basis_size: k });
        }
    }
    Ok(vals)
}

/// Lab-frame eigenvalues of the full two-atom problem assigned to the qutrit
/// photon-number blocks N = 0..=4: in each block, the eigenstates with the
/// largest weight on that block's qutrit product states.
pub fn full_two_atom_blocks(
    atom_a: &Spectrum,
    atom_b: &Spectrum,
    levels: [usize; 3],
    c: &CouplingSpec,
    levels_per_atom: usize,
) -> Result<Vec<Vec<f64>>> {
    let k = levels_per_atom;
    require_levels(atom_a, atom_b, k)?;
    if levels[2] >= k {
        return Err(Error::invalid("qutrit levels exceed the product truncation"));
    }
    let (vals, vecs) = eigh_sorted(product_hamiltonian(atom_a, atom_b, c, k));
    let mut out = Vec::with_capacity(5);
    for n in 0..=4usize {
        let basis: Vec<usize> = (0..3)
            .flat_map(|a| (0..3).map(move |cc| (a, cc)))
            .filter(|&(a, cc)| a + cc == n)
            .map(|(a, cc)| levels[a] * k + levels[cc])
            .collect();
        let mut weights: Vec<(usize, f64)> =
            (0..vals.len()).map(|col| (col, basis.iter().map(|&r| vecs[(r, col)].norm_sqr()).sum())).collect();
        weights.sort_by(|x, y| y.1.total_cmp(&x.1));
        let mut e: Vec<f64> = weights[..basis.len()].iter().map(|&(col, _)| vals[col]).collect();
        e.sort_by(f64::total_cmp);
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{diagonalize_fluxonium, CircuitSpec};

    #[test]
    fn uncoupled_is_product_spectrum() {
        let s = diagonalize_fluxonium(&CircuitSpec::new(0.6, 2.2, 1.5, 0.413), 16, 150).unwrap();
        let vals = full_two_atom_diagonalization(&s, &s, &CouplingSpec::default(), 10, &FullTwoAtomOptions::default())
            .unwrap();
        let mut sums: Vec<f64> =
            (0..12).flat_map(|i| (0..12).map(move |j| (i, j))).map(|(i, j)| s.energies[i] + s.energies[j]).collect();
        sums.sort_by(f64::total_cmp);
        assert!(max_abs_diff(&vals, &sums[..10]) < 1e-12);
    }

    #[test]
    fn sign_of_coupling_matters_slightly() {
        let s = diagonalize_fluxonium(&CircuitSpec::new(0.6, 2.2, 1.5, 0.41317202), 16, 150).unwrap();
        let opts = FullTwoAtomOptions::default();
        let plus = full_two_atom_diagonalization(&s, &s, &CouplingSpec::capacitive(0.1), 9, &opts).unwrap();
        let minus = full_two_atom_diagonalization(&s, &s, &CouplingSpec::capacitive(-0.1), 9, &opts).unwrap();
        let d = max_abs_diff(&plus, &minus);
        assert!(d > 1e-6 && d < 0.05, "asymmetry {d}");
    }
}
