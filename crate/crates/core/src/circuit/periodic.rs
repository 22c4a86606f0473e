use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{HhjjSpec, Spectrum, SpectrumKind};
use crate::error::{Error, Result};
use crate::linalg::eigh_sorted;

pub const DEFAULT_CHARGE_CUTOFF: usize = 40;
const MIN_GRID: usize = 4096;
const ALIAS_TOL: f64 = 1e-10;

fn channel_sum(gap: f64, transmissions: &[f64], phi: f64) -> f64 {
    let s2 = (0.5 * phi).sin().powi(2);
    -gap * transmissions.iter().map(|t| (1.0 - t * s2).sqrt()).sum::<f64>()
}

/// V_A(φ) + V_B(φ + 2πΦ) with V(φ) = −Δ̃ Σ_j sqrt(1 − T_j sin²(φ/2)).
pub fn hhjj_potential(spec: &HhjjSpec, phi: f64) -> Result<f64> {
    spec.validate()?;
    if !phi.is_finite() {
        return Err(Error::invalid("phase must be finite"));
    }
    Ok(potential_unchecked(spec, phi))
}

fn potential_unchecked(spec: &HhjjSpec, phi: f64) -> f64 {
    channel_sum(spec.gap, &spec.transmissions_a, phi)
        + channel_sum(spec.gap, &spec.transmissions_b, phi + 2.0 * PI * spec.flux)
}

/// Fourier coefficients V_k = (1/M) Σ_j V(φ_j) e^{−ikφ_j} on a uniform grid,
/// rejecting grids whose upper half-band still carries weight.
pub(crate) fn fourier_coefficients(v: impl Fn(f64) -> f64, m: usize) -> Result<Vec<Complex64>> {
    let mut buf: Vec<Complex64> = (0..m).map(|j| Complex64::new(v(2.0 * PI * j as f64 / m as f64), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    let peak = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tail = buf[m / 4..=3 * m / 4].iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak > 0.0 && tail > ALIAS_TOL * peak {
        return Err(Error::Resolution { tail: tail / peak });
    }
    Ok(buf)
}

/// Charge-basis diagonalization of 4E_C(n − n_g)² + V(φ) for any 2π-periodic
/// potential.
pub fn diagonalize_periodic_potential(
    potential: impl Fn(f64) -> f64,
    e_c: f64,
    n_g: f64,
    n_levels: usize,
    charge_cutoff: usize,
) -> Result<Spectrum> {
    if !(e_c > 0.0) {
        return Err(Error::invalid("e_c must be positive"));
    }
    if charge_cutoff < 20 {
        return Err(Error::invalid(format!("charge_cutoff must be >= 20, got {charge_cutoff}")));
    }
    let dim = 2 * charge_cutoff + 1;
    if n_levels == 0 || n_levels > dim {
        return Err(Error::invalid("n_levels out of range for the charge basis"));
    }
    // keep every used harmonic |m − m'| ≤ 2C well below the aliasing band
    let m = MIN_GRID.max((16 * charge_cutoff).next_power_of_two());
    let vk = fourier_coefficients(potential, m)?;

    let c = charge_cutoff as i64;
    let charge = |i: usize| i as i64 - c;
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        let k = (charge(i) - charge(j)).rem_euclid(m as i64) as usize;
        let mut v = vk[k];
        if i == j {
            let q = charge(i) as f64 - n_g;
            v += 4.0 * e_c * q * q;
        }
        v
    });
    // enforce exact Hermiticity against FFT round-off
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let (vals, vecs) = eigh_sorted(h);

    let mut u = vecs.columns(0, n_levels).into_owned();
    for l in 0..n_levels {
        let (imax, _) =
            u.column(l)
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        let z = u[(imax, l)];
        let phase = z.conj() / z.norm();
        u.column_mut(l).iter_mut().for_each(|c| *c *= phase);
    }

    let n_op = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(charge(i) as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    // φ restricted to (−π, π]: ⟨m|φ|m'⟩ = i(−1)^k / k with k = m − m'
    let phi_op = DMatrix::from_fn(dim, dim, |i, j| {
        let k = charge(i) - charge(j);
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(0.0, sign / k as f64)
        }
    });
    let ud = u.adjoint();
    Ok(Spectrum {
        energies: vals[..n_levels].to_vec(),
        phi_elems: &ud * phi_op * &u,
        n_elems: &ud * n_op * &u,
        basis_size: dim,
        converged: true,
        e_c,
        kind: SpectrumKind::PeriodicCellPhase,
    })
}

pub fn diagonalize_periodic(spec: &HhjjSpec, e_c: f64, n_levels: usize, charge_cutoff: usize) -> Result<Spectrum> {
    spec.validate()?;
    diagonalize_periodic_potential(|phi| potential_unchecked(spec, phi), e_c, spec.charge_bias, n_levels, charge_cutoff)
}

/// Bandwidth of the transition `a ↔ b` over n_g ∈ [0, 0.5].
pub fn charge_dispersion(spec: &HhjjSpec, e_c: f64, transition: (usize, usize), n_g_grid: usize) -> Result<f64> {
    charge_dispersion_with(
        |s, n_levels| diagonalize_periodic(s, e_c, n_levels, DEFAULT_CHARGE_CUTOFF),
        spec,
        transition,
        n_g_grid,
    )
}

pub(crate) fn charge_dispersion_with(
    solve: impl Fn(&HhjjSpec, usize) -> Result<Spectrum>,
    spec: &HhjjSpec,
    (a, b): (usize, usize),
    n_g_grid: usize,
) -> Result<f64> {
    if n_g_grid < 11 {
        return Err(Error::invalid(format!("n_g_grid must be >= 11, got {n_g_grid}")));
    }
    let n_levels = a.max(b) + 1;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n_g_grid {
        let n_g = 0.5 * i as f64 / (n_g_grid - 1) as f64;
        let s = solve(&spec.with_charge_bias(n_g), n_levels)?;
        let w = s.energies[b] - s.energies[a];
        lo = lo.min(w);
        hi = hi.max(w);
    }
    Ok(hi - lo)
}
