use super::nelder_mead;
use super::{
    amplitudes, psi2_domain, second_derivative, single_coherences, uniform::minimize_psi2, Amplitudes,
    GutzwillerSolution,
};
use crate::effective::LatticeModel;
use crate::error::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;
const GRID: usize = 32;

fn max_imbalance(n: f64) -> f64 {
    n.min(2.0 - n)
}

pub(crate) fn energy_unchecked(c2: f64, d2: f64, m: f64, n: f64, z: f64, model: &LatticeModel) -> f64 {
    let c = amplitudes(c2, n + m);
    let d = amplitudes(d2, n - m);
    let (_, hc) = single_coherences(&c, model.alpha);
    let (_, hd) = single_coherences(&d, model.alpha);
    let w = |p: &[f64; 3]| model.w(0) * p[0] * p[0] + model.w(1) * p[1] * p[1] + model.w(2) * p[2] * p[2];
    -z * model.j_hop * hc * hd - z * model.p_hop * c[0] * c[2] * d[0] * d[2]
        + 0.5 * model.delta * (c[2] * c[2] + d[2] * d[2])
        + 0.5 * z * model.w_sign * w(&c) * w(&d)
}

/// Two-sublattice energy per site with densities n ± m on C and D.
pub fn bipartite_energy(c2: f64, d2: f64, m: f64, n: f64, z: f64, model: &LatticeModel) -> Result<f64> {
    if !(n > 0.0 && n < 2.0) {
        return Err(Error::invalid(format!("density must lie in (0, 2), got {n}")));
    }
    if m.abs() > max_imbalance(n) + DOMAIN_SLACK {
        return Err(Error::invalid(format!("|m| = {} exceeds min(n, 2 - n)", m.abs())));
    }
    for (x, dens) in [(c2, n + m), (d2, n - m)] {
        let (lo, hi) = psi2_domain(dens.clamp(0.0, 2.0));
        if x < lo - DOMAIN_SLACK || x > hi + DOMAIN_SLACK {
            return Err(Error::invalid(format!("amplitude {x} outside [{lo}, {hi}] at sublattice density {dens}")));
        }
    }
    Ok(energy_unchecked(c2, d2, m, n, z, model))
}

/// Unit-cube coordinates → (c2, d2, m).
fn decode(u: &[f64; 3], n: f64) -> (f64, f64, f64) {
    let m = (2.0 * u[0] - 1.0) * max_imbalance(n);
    let lerp = |t: f64, dens: f64| {
        let (lo, hi) = psi2_domain(dens.clamp(0.0, 2.0));
        lo + t * (hi - lo)
    };
    (lerp(u[1], n + m), lerp(u[2], n - m), m)
}

fn best_energy(n: f64, z: f64, model: &LatticeModel) -> (f64, f64, f64, f64) {
    let f = |u: &[f64; 3]| {
        let (c2, d2, m) = decode(u, n);
        energy_unchecked(c2, d2, m, n, z, model)
    };
    let axis = |k: usize, len: usize| k as f64 / (len - 1) as f64;
    // odd number of imbalance points so that m = 0 is on the grid
    let mg = GRID + 1;
    let mut grid: Vec<([f64; 3], f64)> = Vec::with_capacity(mg * GRID * GRID);
    for i in 0..mg {
        for j in 0..GRID {
            for k in 0..GRID {
                let u = [axis(i, mg), axis(j, GRID), axis(k, GRID)];
                grid.push((u, f(&u)));
            }
        }
    }
    let slice_best = |pred: &dyn Fn(&[f64; 3]) -> bool| {
        grid.iter().filter(|(u, _)| pred(u)).min_by(|a, b| a.1.total_cmp(&b.1)).map(|g| g.0)
    };
    let mut starts: Vec<[f64; 3]> = Vec::new();
    starts.extend(slice_best(&|u| (u[0] - 0.5).abs() < 1e-12));
    starts.extend(slice_best(&|u| u[0] == 1.0));
    starts.extend(slice_best(&|u| u[0] == 0.0));
    let mut sorted: Vec<&([f64; 3], f64)> = grid.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (u, _) in sorted {
        if starts.len() >= 9 {
            break;
        }
        if starts.iter().all(|s| (0..3).any(|k| (s[k] - u[k]).abs() > 0.1)) {
            starts.push(*u);
        }
    }

    let mut candidates: Vec<(f64, f64, f64, f64)> = starts
        .iter()
        .map(|s| {
            let r = nelder_mead::minimize(&f, *s, 0.5 / GRID as f64, 4000);
            let (c2, d2, m) = decode(&r.x, n);
            (c2, d2, m, r.f)
        })
        .collect();
    // the uniform optimum belongs to the variational class
    let (psi2, e_uniform) = minimize_psi2(n, z, model);
    candidates.push((psi2, psi2, 0.0, e_uniform));

    let e_min = candidates.iter().map(|c| c.3).fold(f64::INFINITY, f64::min);
    let e_max = candidates.iter().map(|c| c.3).fold(f64::NEG_INFINITY, f64::max);
    if e_max - e_min > 1e-8 {
        log::debug!("bipartite restarts disagree by {:.3e} at n = {n}", e_max - e_min);
    }
    // ties go to the smaller imbalance, then to m > 0
    *candidates
        .iter()
        .filter(|c| c.3 <= e_min + 1e-10)
        .min_by(|a, b| a.2.abs().total_cmp(&b.2.abs()).then(b.2.total_cmp(&a.2)))
        .unwrap()
}

/// Multi-start minimization of the two-sublattice functional; resolves
/// first-order transitions between uniform and imbalanced states.
pub fn minimize_bipartite(n: f64, z: f64, model: &LatticeModel) -> Result<GutzwillerSolution> {
    if !(n > 0.0 && n < 2.0) {
        return Err(Error::invalid(format!("density must lie in (0, 2), got {n}")));
    }
    let (c2, d2, m, energy) = best_energy(n, z, model);
    let c = amplitudes(c2, n + m);
    let d = amplitudes(d2, n - m);
    let (bc, _) = single_coherences(&c, model.alpha);
    let (bd, _) = single_coherences(&d, model.alpha);
    let stability = second_derivative(|nn| best_energy(nn, z, model).3, n);
    Ok(GutzwillerSolution {
        amplitudes: Amplitudes::Bipartite { c, d, m },
        energy_per_site: energy,
        g1: bc * bd,
        g1_pair: 2.0 * c[0] * c[2] * d[0] * d[2],
        imbalance: m,
        stability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::Boundary;
    use crate::gutzwiller::{minimize_uniform, uniform_energy};

    fn model(alpha: f64, p: f64, delta: f64, dw2: f64) -> LatticeModel {
        LatticeModel { alpha, p_hop: p, delta, dw2, ..LatticeModel::chain(4, Boundary::Periodic) }
    }

    #[test]
    fn symmetric_point_is_uniform() {
        let m = LatticeModel { w0: 0.3, dw1: 0.2, dw2: -0.4, ..model(1.2, 0.4, 0.7, 0.0) };
        for i in 0..20 {
            let n = 0.05 + 1.9 * i as f64 / 19.0;
            let (lo, hi) = psi2_domain(n);
            let x = lo + 0.37 * (hi - lo);
            let a = bipartite_energy(x, x, 0.0, n, 2.0, &m).unwrap();
            let b = uniform_energy(x, n, 2.0, &m).unwrap();
            assert!((a - b).abs() < 1e-14, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn closed_form_checkerboard_and_pair_superfluid() {
        let z = 2.0;
        let m = LatticeModel { j_hop: 0.0, ..model(1.0, 0.8, 1.5, 0.6) };
        let pcb = bipartite_energy(1.0, 0.0, 1.0, 1.0, z, &m).unwrap();
        assert!((pcb - m.delta / 2.0).abs() < 1e-14);
        let n: f64 = 1.0;
        let x = (n / 2.0).sqrt();
        let psf = bipartite_energy(x, x, 0.0, n, z, &m).unwrap();
        let expect = -z * m.p_hop * (1.0 - n / 2.0) * (n / 2.0) + m.delta * n / 2.0 + z / 8.0 * m.dw2 * m.dw2 * n * n;
        assert!((psf - expect).abs() < 1e-14);
    }

    #[test]
    fn zero_hopping_checkerboard() {
        // P < δW2²/2 at J = 0 favours the pair checkerboard
        let m = LatticeModel { j_hop: 0.0, ..model(1.0, 0.2, -1.0, 1.0) };
        let s = minimize_bipartite(1.0, 2.0, &m).unwrap();
        assert!((s.imbalance.abs() - 1.0).abs() < 1e-6, "m = {}", s.imbalance);
        let m = LatticeModel { j_hop: 0.0, ..model(1.0, 0.8, -1.0, 1.0) };
        let s = minimize_bipartite(1.0, 2.0, &m).unwrap();
        assert!(s.imbalance.abs() < 1e-6, "m = {}", s.imbalance);
    }

    #[test]
    fn never_above_uniform_and_symmetric_without_w() {
        for &(a, p, d) in &[(0.3, 0.0, -10.0), (1.5, 4.0, 5.0), (0.0, 1.0, 0.0), (2.0, 8.0, 20.0)] {
            let m = model(a, p, d, 0.0);
            let b = minimize_bipartite(1.0, 2.0, &m).unwrap();
            let u = minimize_uniform(1.0, 2.0, &m).unwrap();
            assert!(b.energy_per_site <= u.energy_per_site + 1e-10);
            assert!(b.imbalance.abs() < 1e-6);
        }
    }
}
