use super::basis::SectorBasis;
use crate::effective::LatticeModel;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Real symmetric operator on one particle-number sector.
pub trait HamiltonianOperator: Sync {
    fn dim(&self) -> usize;

    /// y = H x.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Upper bound on the spectral radius (Gershgorin).
    fn norm_bound(&self) -> f64;

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        m
    }
}

/// Per-model matrix-element tables, shared by the CSR and matrix-free paths.
#[derive(Clone, Debug)]
pub(crate) struct Elements {
    bonds: Vec<(usize, usize)>,
    /// hop[ρ_to][ρ_from]: amplitude of b†_to b_from with pre-hop occupations.
    hop: [[f64; 3]; 3],
    pair: f64,
    onsite_pair: f64,
    /// s·W(ρ_i)W(ρ_j)
    w_bond: [[f64; 3]; 3],
}

impl Elements {
    pub(crate) fn new(model: &LatticeModel) -> Self {
        let mut hop = [[0.0; 3]; 3];
        for to in 0..3u8 {
            for from in 1..3u8 {
                if to < 2 {
                    let exponent = (to + from - 1) as i32;
                    hop[to as usize][from as usize] =
                        -model.j_hop * model.alpha.powi(exponent) * ((to + 1) as f64).sqrt() * (from as f64).sqrt();
                }
            }
        }
        let mut w_bond = [[0.0; 3]; 3];
        for a in 0..3u8 {
            for b in 0..3u8 {
                w_bond[a as usize][b as usize] = model.w_sign * model.w(a) * model.w(b);
            }
        }
        Self { bonds: model.bonds.clone(), hop, pair: -model.p_hop, onsite_pair: model.delta, w_bond }
    }

    /// Diagonal element and off-diagonal (target, value) pairs for one state.
    #[inline]
    pub(crate) fn row(&self, basis: &SectorBasis, s: u64, off: &mut Vec<(u64, f64)>) -> f64 {
        off.clear();
        let mut diag = 0.0;
        if self.onsite_pair != 0.0 {
            diag += self.onsite_pair * basis.pair_count(s) as f64;
        }
        for &(i, j) in &self.bonds {
            let (ri, rj) = (basis.occ(s, i), basis.occ(s, j));
            diag += self.w_bond[ri as usize][rj as usize];
            for (to, from, rt, rf) in [(i, j, ri, rj), (j, i, rj, ri)] {
                let a = self.hop[rt as usize][rf as usize];
                if a != 0.0 {
                    let t = basis.with_occ(basis.with_occ(s, to, rt + 1), from, rf - 1);
                    off.push((t, a));
                }
                if rt == 0 && rf == 2 && self.pair != 0.0 {
                    let t = basis.with_occ(basis.with_occ(s, to, 2), from, 0);
                    off.push((t, self.pair));
                }
            }
        }
        diag
    }
}

/// Row-compressed sector Hamiltonian.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// Largest |H_ij − H_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.dim)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }
}

impl HamiltonianOperator for SparseHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().with_min_len(256).enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        });
    }

    fn norm_bound(&self) -> f64 {
        (0..self.dim).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

fn check(model: &LatticeModel, basis: &SectorBasis) -> Result<()> {
    model.validate()?;
    if model.n_sites != basis.n_sites() {
        return Err(Error::invalid(format!("model has {} sites but the basis has {}", model.n_sites, basis.n_sites())));
    }
    Ok(())
}

pub fn build_hamiltonian(model: &LatticeModel, basis: &SectorBasis) -> Result<SparseHamiltonian> {
    check(model, basis)?;
    let el = Elements::new(model);
    let rows: Vec<Vec<(usize, f64)>> = (0..basis.dim())
        .into_par_iter()
        .with_min_len(256)
        .map_init(Vec::new, |off, i| {
            let diag = el.row(basis, basis.state(i), off);
            let mut row: Vec<(usize, f64)> =
                off.iter().map(|&(t, v)| (basis.index_of(t).expect("hop stays in sector"), v)).collect();
            row.push((i, diag));
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|&(c, v)| v != 0.0 || c == i);
            merged
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    row_ptr.push(0);
    let nnz: usize = rows.iter().map(Vec::len).sum();
    let (mut cols, mut values) = (Vec::with_capacity(nnz), Vec::with_capacity(nnz));
    for r in rows {
        for (c, v) in r {
            cols.push(c);
            values.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseHamiltonian { dim: basis.dim(), row_ptr, cols, values })
}

/// Applies H by regenerating matrix elements on the fly; for sectors whose
/// CSR form would not fit in memory.
pub struct MatrixFreeHamiltonian<'a> {
    basis: &'a SectorBasis,
    el: Elements,
    bound: f64,
}

impl<'a> MatrixFreeHamiltonian<'a> {
    pub fn new(model: &LatticeModel, basis: &'a SectorBasis) -> Result<Self> {
        check(model, basis)?;
        let el = Elements::new(model);
        // Gershgorin bound from the largest possible per-bond contribution
        let per_bond = 2.0 * el.hop.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()))
            + 2.0 * el.pair.abs()
            + el.w_bond.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
        let bound = per_bond * el.bonds.len() as f64 + el.onsite_pair.abs() * basis.n_sites() as f64;
        Ok(Self { basis, el, bound })
    }
}

impl HamiltonianOperator for MatrixFreeHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().with_min_len(1024).enumerate().for_each_init(Vec::new, |off, (i, yi)| {
            let diag = self.el.row(self.basis, self.basis.state(i), off);
            let mut acc = diag * x[i];
            for &(t, v) in off.iter() {
                acc += v * x[self.basis.index_of(t).expect("hop stays in sector")];
            }
            *yi = acc;
        });
    }

    fn norm_bound(&self) -> f64 {
        self.bound
    }
}
