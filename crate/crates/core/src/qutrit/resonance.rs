use serde::{Deserialize, Serialize};

use super::LevelPolicy;
use crate::circuit::{CircuitSpec, FluxoniumBasis, DEFAULT_BASIS_SIZE};
use crate::error::{Error, Result};

/// |Δ| below which a flux point counts as resonant (GHz).
pub const RESONANCE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resonance {
    Roots(Vec<f64>),
    /// Harmonic limit: Δ vanishes identically.
    Everywhere,
}

impl Resonance {
    pub fn roots(&self) -> &[f64] {
        match self {
            Resonance::Roots(r) => r,
            Resonance::Everywhere => &[],
        }
    }
}

/// Δ(Φ) = ω21 − ω10 for the policy's levels.
pub fn anharmonicity(basis: &FluxoniumBasis, e_j: f64, flux: f64, policy: LevelPolicy) -> f64 {
    let [l0, l1, l2] = policy.levels();
    let e = basis.energies(e_j, flux, l2 + 1);
    (e[l2] - e[l1]) - (e[l1] - e[l0])
}

/// All flux values in `range` where Δ changes sign, refined by bisection.
pub fn find_resonant_flux(
    template: &CircuitSpec,
    policy: LevelPolicy,
    range: (f64, f64),
    grid: usize,
) -> Result<Resonance> {
    template.validate()?;
    let basis = FluxoniumBasis::new(template.e_c, template.e_l, DEFAULT_BASIS_SIZE)?;
    find_resonant_flux_in(&basis, template.e_j, policy, range, grid)
}

pub fn find_resonant_flux_in(
    basis: &FluxoniumBasis,
    e_j: f64,
    policy: LevelPolicy,
    (lo, hi): (f64, f64),
    grid: usize,
) -> Result<Resonance> {
    if grid < 64 {
        return Err(Error::invalid(format!("resonance grid must have >= 64 points, got {grid}")));
    }
    if !(lo < hi) {
        return Err(Error::invalid("flux range must be increasing"));
    }
    if e_j == 0.0 {
        return Ok(Resonance::Everywhere);
    }
    let delta = |f: f64| anharmonicity(basis, e_j, f, policy);
    let fs: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
    let ds: Vec<f64> = fs.iter().map(|&f| delta(f)).collect();

    let mut roots = Vec::new();
    for i in 0..grid - 1 {
        let (mut a, mut b) = (fs[i], fs[i + 1]);
        let (mut da, db) = (ds[i], ds[i + 1]);
        if da == 0.0 {
            roots.push(a);
            continue;
        }
        if da * db > 0.0 || db == 0.0 {
            continue;
        }
        let mut found = None;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let dm = delta(m);
            if dm.abs() < RESONANCE_TOL {
                found = Some(m);
                break;
            }
            if dm * da < 0.0 {
                b = m;
            } else {
                a = m;
                da = dm;
            }
            if b - a < 1e-15 {
                break;
            }
        }
        match found {
            Some(r) => roots.push(r),
            None => {
                return Err(Error::Numerical(format!(
                    "bisection for Δ = 0 stalled in [{a}, {b}] without reaching |Δ| < {RESONANCE_TOL}"
                )))
            }
        }
    }
    if let Some(&last) = ds.last() {
        if last == 0.0 {
            roots.push(hi);
        }
    }
    Ok(Resonance::Roots(roots))
}
