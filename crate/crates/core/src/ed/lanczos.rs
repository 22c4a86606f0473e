use super::hamiltonian::HamiltonianOperator;
use crate::error::{Error, Result};
use crate::linalg::eigh_sorted;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sectors up to this dimension are diagonalized densely.
pub const DEFAULT_DENSE_THRESHOLD: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenOptions {
    /// Residual tolerance relative to the operator norm bound.
    pub tol: f64,
    pub dense_threshold: usize,
    /// Krylov vectors per restart cycle (capped further for huge sectors).
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-9, dense_threshold: DEFAULT_DENSE_THRESHOLD, krylov_dim: 80, max_restarts: 400, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// ‖Hv − Ev‖
    pub residual: f64,
}

const PAR_MIN: usize = 1 << 14;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a.len() >= PAR_MIN {
        a.par_chunks(4096).zip(b.par_chunks(4096)).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>()).sum()
    } else {
        a.iter().zip(b).map(|(p, q)| p * q).sum()
    }
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    if y.len() >= PAR_MIN {
        y.par_chunks_mut(4096).zip(x.par_chunks(4096)).for_each(|(yc, xc)| {
            yc.iter_mut().zip(xc).for_each(|(p, q)| *p += a * q);
        });
    } else {
        y.iter_mut().zip(x).for_each(|(p, q)| *p += a * q);
    }
}

fn scale(y: &mut [f64], a: f64) {
    y.iter_mut().for_each(|p| *p *= a);
}

fn residual_norm<O: HamiltonianOperator + ?Sized>(op: &O, value: f64, v: &[f64], work: &mut [f64]) -> f64 {
    op.apply(v, work);
    axpy(work, -value, v);
    dot(work, work).sqrt()
}

/// Lowest eigenpair: dense below the threshold, otherwise restarted Lanczos
/// with full reorthogonalization, restarting from the current Ritz vector.
pub fn lowest_eigenpair<O: HamiltonianOperator + ?Sized>(op: &O, opts: &EigenOptions) -> Result<Eigenpair> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::invalid("empty operator"));
    }
    let scale_h = op.norm_bound().max(1.0);
    let tol = opts.tol * scale_h;
    if n <= opts.dense_threshold {
        let (vals, vecs) = eigh_sorted(op.to_dense());
        let vector: Vec<f64> = vecs.column(0).iter().copied().collect();
        let mut work = vec![0.0; n];
        let residual = residual_norm(op, vals[0], &vector, &mut work);
        return Ok(Eigenpair { value: vals[0], vector, residual });
    }

    // keep the Krylov block under ~1 GB
    let mem_cap = (1usize << 27) / n;
    let m = opts.krylov_dim.min(mem_cap.max(12)).min(n).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let nrm = dot(&start, &start).sqrt();
    scale(&mut start, 1.0 / nrm);

    let mut work = vec![0.0; n];
    let mut best = f64::INFINITY;
    for cycle in 0..opts.max_restarts.max(1) {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let (mut alphas, mut betas) = (Vec::with_capacity(m), Vec::with_capacity(m));
        loop {
            let k = basis.len() - 1;
            let mut w = vec![0.0; n];
            op.apply(&basis[k], &mut w);
            let a = dot(&basis[k], &w);
            alphas.push(a);
            // two passes of classical Gram–Schmidt against the whole block
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(&mut w, -c, v);
                }
            }
            let b = dot(&w, &w).sqrt();
            if basis.len() == m || b <= 1e-13 * scale_h {
                break;
            }
            betas.push(b);
            scale(&mut w, 1.0 / b);
            basis.push(w);
        }
        let k = alphas.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let (theta, y) = eigh_sorted(t);
        let mut x = vec![0.0; n];
        for (v, &c) in basis.iter().zip(y.column(0).iter()) {
            axpy(&mut x, c, v);
        }
        let nrm = dot(&x, &x).sqrt();
        scale(&mut x, 1.0 / nrm);
        let r = residual_norm(op, theta[0], &x, &mut work);
        best = best.min(r);
        log::debug!("lanczos cycle {cycle}: E = {:.12}, residual {r:.3e} (target {tol:.1e}, m = {m})", theta[0]);
        if r <= tol {
            return Ok(Eigenpair { value: theta[0], vector: x, residual: r });
        }
        start = x;
    }
    Err(Error::NotConverged { what: "lanczos ground state", residual: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::{build_hamiltonian, SectorBasis};
    use crate::effective::{Boundary, LatticeModel};
    use crate::linalg::eigvalsh_sorted;

    #[test]
    fn sparse_matches_dense() {
        let m = LatticeModel {
            alpha: 0.6,
            p_hop: 0.9,
            delta: -1.2,
            dw1: 0.3,
            ..LatticeModel::chain(8, Boundary::Periodic)
        };
        let b = SectorBasis::new(8, 5).unwrap();
        let h = build_hamiltonian(&m, &b).unwrap();
        assert!(h.dim() > DEFAULT_DENSE_THRESHOLD);
        let sparse = lowest_eigenpair(&h, &EigenOptions::default()).unwrap();
        let dense = eigvalsh_sorted(h.to_dense())[0];
        assert!((sparse.value - dense).abs() < 1e-10, "{} vs {dense}", sparse.value);
        assert!(sparse.residual <= 1e-9 * h.norm_bound());
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let m = LatticeModel { alpha: 1.4, ..LatticeModel::chain(8, Boundary::Open) };
        let b = SectorBasis::new(8, 4).unwrap();
        let h = build_hamiltonian(&m, &b).unwrap();
        let a = lowest_eigenpair(&h, &EigenOptions::default()).unwrap();
        let c = lowest_eigenpair(&h, &EigenOptions::default()).unwrap();
        assert_eq!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn exhausted_restarts_report_residual() {
        let m = LatticeModel { alpha: 1.4, ..LatticeModel::chain(8, Boundary::Open) };
        let b = SectorBasis::new(8, 5).unwrap();
        let h = build_hamiltonian(&m, &b).unwrap();
        let opts = EigenOptions { krylov_dim: 3, max_restarts: 1, tol: 1e-14, ..Default::default() };
        match lowest_eigenpair(&h, &opts) {
            Err(Error::NotConverged { residual, .. }) => assert!(residual > 0.0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
