use super::{amplitudes, psi2_domain, second_derivative, single_coherences, Amplitudes, GutzwillerSolution};
use crate::effective::LatticeModel;
use crate::error::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;

pub(crate) fn energy_unchecked(psi2: f64, n: f64, z: f64, m: &LatticeModel) -> f64 {
    let p = amplitudes(psi2, n);
    let (_, hop) = single_coherences(&p, m.alpha);
    let w = m.w(0) * p[0] * p[0] + m.w(1) * p[1] * p[1] + m.w(2) * p[2] * p[2];
    -z * m.j_hop * hop * hop - z * m.p_hop * (p[0] * p[2]).powi(2) + m.delta * p[2] * p[2] + 0.5 * z * m.w_sign * w * w
}

/// Energy per site of the uniform real product state at density n:
/// −zJ(ψ0ψ1 + √2αψ1ψ2)² − zP(ψ0ψ2)² + Δψ2² + (z/2)(Σ W_r ψ_r²)².
pub fn uniform_energy(psi2: f64, n: f64, z: f64, model: &LatticeModel) -> Result<f64> {
    if !(n > 0.0 && n < 2.0) {
        return Err(Error::invalid(format!("density must lie in (0, 2), got {n}")));
    }
    let (lo, hi) = psi2_domain(n);
    if psi2 < lo - DOMAIN_SLACK || psi2 > hi + DOMAIN_SLACK {
        return Err(Error::invalid(format!("psi2 = {psi2} outside [{lo}, {hi}] at n = {n}")));
    }
    Ok(energy_unchecked(psi2.clamp(lo, hi), n, z, model))
}

/// Global minimum over ψ2: 256-point grid, then golden-section refinement.
pub(crate) fn minimize_psi2(n: f64, z: f64, m: &LatticeModel) -> (f64, f64) {
    let (lo, hi) = psi2_domain(n);
    let f = |x: f64| energy_unchecked(x, n, z, m);
    let pts = 256;
    let xs: Vec<f64> = (0..pts).map(|i| lo + (hi - lo) * i as f64 / (pts - 1) as f64).collect();
    let (ibest, _) =
        xs.iter()
            .map(|&x| f(x))
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let a = xs[ibest.saturating_sub(1)];
    let b = xs[(ibest + 1).min(pts - 1)];
    let x = golden_section(&f, a, b, 1e-10);
    // endpoint optima are common (Mott, fully paired) — check them exactly
    [x, a, b, lo, hi]
        .into_iter()
        .map(|x| (x, f(x)))
        .fold((x, f64::INFINITY), |acc, (x, v)| if v < acc.1 { (x, v) } else { acc })
}

pub(crate) fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn minimize_uniform(n: f64, z: f64, model: &LatticeModel) -> Result<GutzwillerSolution> {
    if !(n > 0.0 && n < 2.0) {
        return Err(Error::invalid(format!("density must lie in (0, 2), got {n}")));
    }
    let (psi2, energy) = minimize_psi2(n, z, model);
    let p = amplitudes(psi2, n);
    let (b, _) = single_coherences(&p, model.alpha);
    let stability = second_derivative(|nn| minimize_psi2(nn, z, model).1, n);
    Ok(GutzwillerSolution {
        amplitudes: Amplitudes::Uniform { psi: p },
        energy_per_site: energy,
        g1: b * b,
        g1_pair: 2.0 * (p[0] * p[2]).powi(2),
        imbalance: 0.0,
        stability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::{Boundary, LatticeModel};
    use std::f64::consts::SQRT_2;

    fn model(alpha: f64, p: f64, delta: f64) -> LatticeModel {
        LatticeModel { alpha, p_hop: p, delta, ..LatticeModel::chain(4, Boundary::Periodic) }
    }

    #[test]
    fn closed_form_points() {
        let m = model(1.3, 0.7, 2.1);
        let z = 2.0;
        let psf = uniform_energy(0.5f64.sqrt(), 1.0, z, &m).unwrap();
        assert!((psf - (-z * m.p_hop / 4.0 + m.delta / 2.0)).abs() < 1e-14);
        assert!(uniform_energy(0.0, 1.0, z, &m).unwrap().abs() < 1e-15);
        assert!(uniform_energy(0.9, 1.0, z, &m).is_err());
    }

    #[test]
    fn matches_dense_grid() {
        let m = model(1.0, 0.0, 0.0);
        let n = 1.0 / 3.0;
        let (lo, hi) = psi2_domain(n);
        let oracle = (0..=100_000)
            .map(|i| lo + (hi - lo) * i as f64 / 1e5)
            .map(|x| energy_unchecked(x, n, 2.0, &m))
            .fold(f64::INFINITY, f64::min);
        let s = minimize_uniform(n, 2.0, &m).unwrap();
        assert!((s.energy_per_site - oracle).abs() < 1e-8);
        assert!(s.energy_per_site <= oracle + 1e-15);
    }

    #[test]
    fn mott_and_pair_limits() {
        let z = 2.0;
        let alpha: f64 = 1.0;
        let mott = z * (1.0 + SQRT_2 * alpha).powi(2);
        let mi = minimize_uniform(1.0, z, &model(alpha, 0.0, mott + 0.5)).unwrap();
        assert!(mi.g1 < 1e-12);
        let Amplitudes::Uniform { psi } = mi.amplitudes else { panic!() };
        assert!(psi[2] < 1e-9);

        let psf = minimize_uniform(1.0, z, &model(alpha, 0.0, -100.0)).unwrap();
        assert!(psf.g1 < 1e-12);
        assert!((psf.g1_pair - 0.5).abs() < 1e-9);
    }

    #[test]
    fn large_alpha_is_unstable() {
        let s = minimize_uniform(1.0 / 3.0, 2.0, &model(1.5, 0.0, 0.0)).unwrap();
        assert!(s.stability < 0.0, "{}", s.stability);
        let s = minimize_uniform(1.0 / 3.0, 2.0, &model(0.5, 0.0, 0.0)).unwrap();
        assert!(s.stability > 0.0);
    }
}
