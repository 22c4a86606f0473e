use super::hamiltonian::HamiltonianOperator;
use super::SectorState;
use crate::effective::LatticeModel;
use crate::error::{Error, Result};
use crate::linalg::eigh_sorted;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationOptions {
    /// Largest step between Krylov restarts.
    pub dt: f64,
    /// Error estimate allowed per step.
    pub tol: f64,
    pub max_krylov: usize,
    pub dense_threshold: usize,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { dt: 0.05, tol: 1e-9, max_krylov: 40, dense_threshold: super::lanczos::DEFAULT_DENSE_THRESHOLD }
    }
}

impl PropagationOptions {
    /// Step 0.05 / max(|J|, |P|, |Δ|, 1).
    pub fn for_model(model: &LatticeModel) -> Self {
        let s = model.j_hop.abs().max(model.p_hop.abs()).max(model.delta.abs()).max(1.0);
        Self { dt: 0.05 / s, ..Default::default() }
    }
}

/// Site-resolved observables recorded at each requested time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// density[t][j] = ⟨n̂_j⟩
    pub density: Vec<Vec<f64>>,
    /// pair_density[t][j] = ⟨n̂_j(n̂_j − 1)⟩
    pub pair_density: Vec<Vec<f64>>,
    pub norm: Vec<f64>,
    pub total_number: Vec<f64>,
}

fn apply_complex<O: HamiltonianOperator + ?Sized>(op: &O, v: &[Complex64], out: &mut [Complex64]) {
    let n = v.len();
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    let (mut hr, mut hi) = (vec![0.0; n], vec![0.0; n]);
    op.apply(&re, &mut hr);
    op.apply(&im, &mut hi);
    for (o, (r, i)) in out.iter_mut().zip(hr.into_iter().zip(hi)) {
        *o = Complex64::new(r, i);
    }
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// One Lanczos-Krylov approximation of exp(−iH dt)ψ; None if the error
/// estimate stays above tolerance at the largest subspace.
fn krylov_try<O: HamiltonianOperator + ?Sized>(
    op: &O,
    psi: &[Complex64],
    dt: f64,
    tol: f64,
    m_max: usize,
) -> Option<Vec<Complex64>> {
    let n = psi.len();
    let nu = cnorm(psi);
    if nu == 0.0 {
        return Some(psi.to_vec());
    }
    let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|z| z / nu).collect()];
    let (mut alphas, mut betas): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let scale_h = op.norm_bound().max(1.0);
    for _ in 0..m_max.min(n).max(1) {
        let k = basis.len() - 1;
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        apply_complex(op, &basis[k], &mut w);
        alphas.push(cdot(&basis[k], &w).re);
        for _ in 0..2 {
            for v in &basis {
                let c = cdot(v, &w);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = cnorm(&w);
        let dim = alphas.len();
        let t = DMatrix::from_fn(dim, dim, |i, j| match (i, j) {
            _ if i == j => alphas[i],
            _ if i + 1 == j => betas[i],
            _ if j + 1 == i => betas[j],
            _ => 0.0,
        });
        let (vals, vecs) = eigh_sorted(t);
        let coef: Vec<Complex64> = (0..dim)
            .map(|r| {
                (0..dim).map(|q| Complex64::from_polar(vecs[(r, q)] * vecs[(0, q)], -vals[q] * dt)).sum::<Complex64>()
            })
            .collect();
        let invariant = b <= 1e-13 * scale_h;
        let err = b * coef[dim - 1].norm() * nu;
        if invariant || err < tol || dim == n {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (v, c) in basis.iter().zip(&coef) {
                out.iter_mut().zip(v).for_each(|(o, x)| *o += c * nu * x);
            }
            return Some(out);
        }
        betas.push(b);
        basis.push(w.into_iter().map(|z| z / b).collect());
    }
    None
}

fn krylov_step<O: HamiltonianOperator + ?Sized>(
    op: &O,
    psi: Vec<Complex64>,
    dt: f64,
    opts: &PropagationOptions,
    depth: u32,
) -> Result<Vec<Complex64>> {
    if let Some(out) = krylov_try(op, &psi, dt, opts.tol, opts.max_krylov) {
        return Ok(out);
    }
    if depth >= 24 {
        return Err(Error::NotConverged { what: "krylov propagation", residual: opts.tol });
    }
    let half = krylov_step(op, psi, 0.5 * dt, opts, depth + 1)?;
    krylov_step(op, half, 0.5 * dt, opts, depth + 1)
}

/// exp(−iHt)|ψ0⟩ sampled on an ascending time grid (t ≥ 0).
pub fn time_evolve<O: HamiltonianOperator + ?Sized>(
    state0: &SectorState,
    op: &O,
    times: &[f64],
    opts: &PropagationOptions,
) -> Result<Trajectory> {
    if state0.amplitudes.len() != op.dim() {
        return Err(Error::invalid("state and Hamiltonian live in different sectors"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("time grid must be finite, non-negative and ascending"));
    }
    if !(opts.dt > 0.0 && opts.tol > 0.0 && opts.max_krylov >= 2) {
        return Err(Error::invalid("propagation needs dt > 0, tol > 0 and at least two Krylov vectors"));
    }
    let n = op.dim();
    let mut traj = Trajectory {
        times: times.to_vec(),
        density: Vec::with_capacity(times.len()),
        pair_density: Vec::with_capacity(times.len()),
        norm: Vec::with_capacity(times.len()),
        total_number: Vec::with_capacity(times.len()),
    };
    let mut state = state0.clone();
    let mut record = |s: &SectorState| {
        let d = s.density();
        traj.total_number.push(d.iter().sum());
        traj.density.push(d);
        traj.pair_density.push(s.pair_density().into_iter().map(|p| 2.0 * p).collect());
        traj.norm.push(s.norm());
    };

    if n <= opts.dense_threshold {
        let (vals, vecs) = eigh_sorted(op.to_dense());
        let v0 = nalgebra::DVector::from_vec(state0.amplitudes.clone());
        for &t in times {
            let v = crate::linalg::propagate_eigen(&vals, &vecs, &v0, t);
            state.amplitudes = v.iter().copied().collect();
            record(&state);
        }
        return Ok(traj);
    }

    let mut now = 0.0;
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span / opts.dt).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let mut psi = std::mem::take(&mut state.amplitudes);
            for _ in 0..steps {
                psi = krylov_step(op, psi, h, opts, 0)?;
            }
            state.amplitudes = psi;
            now = t;
        }
        record(&state);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::{build_hamiltonian, SectorBasis};
    use crate::effective::{Boundary, LatticeModel};
    use std::sync::Arc;

    #[test]
    fn krylov_matches_dense_exponential() {
        let m = LatticeModel { alpha: 1.2, p_hop: 0.7, delta: 0.5, dw2: 0.3, ..LatticeModel::chain(8, Boundary::Open) };
        let b = Arc::new(SectorBasis::new(8, 5).unwrap());
        let h = build_hamiltonian(&m, &b).unwrap();
        assert!(b.dim() > 400);
        let s0 = SectorState::fock(b.clone(), &[0, 0, 1, 2, 1, 1, 0, 0]).unwrap();
        let times = [0.0, 0.3, 1.0, 2.5];
        let opts = PropagationOptions::for_model(&m);
        let kry = time_evolve(&s0, &h, &times, &opts).unwrap();
        let dense = time_evolve(&s0, &h, &times, &PropagationOptions { dense_threshold: usize::MAX, ..opts }).unwrap();
        for (a, c) in kry.density.iter().flatten().zip(dense.density.iter().flatten()) {
            assert!((a - c).abs() < 1e-8);
        }
        for k in 0..times.len() {
            assert!((kry.norm[k] - 1.0).abs() < 1e-8);
            assert!((kry.total_number[k] - 5.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let m = LatticeModel::chain(3, Boundary::Open);
        let b = Arc::new(SectorBasis::new(3, 1).unwrap());
        let h = build_hamiltonian(&m, &b).unwrap();
        let s0 = SectorState::fock(b, &[0, 1, 0]).unwrap();
        assert!(time_evolve(&s0, &h, &[1.0, 0.5], &PropagationOptions::default()).is_err());
        assert!(time_evolve(&s0, &h, &[-1.0], &PropagationOptions::default()).is_err());
    }
}
