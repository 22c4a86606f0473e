//! Closed-form α = 0 spectrum: pairs are frozen, singles are hard-core and
//! hop only onto empty sites, so N_p is conserved and the movers are free
//! fermions on the sites not blocked by pairs.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Hard-core bosons on a ring: −2J Σ cos(2πn/L), n running over the N
/// (half-)integers centred on zero.
pub fn e_tg(n: usize, l: usize, j: f64) -> f64 {
    let c = (n as f64 - 1.0) / 2.0;
    -2.0 * j * (0..n).map(|k| (2.0 * PI * (k as f64 - c) / l as f64).cos()).sum::<f64>()
}

/// Hard-core bosons on an open segment of L sites: −2J Σ_{n=1..N} cos(πn/(L+1)).
pub fn e_well(n: usize, l: usize, j: f64) -> f64 {
    -2.0 * j * (1..=n).map(|k| (PI * k as f64 / (l as f64 + 1.0)).cos()).sum::<f64>()
}

/// Lowest energy of the ring with N bosons of which N_p form frozen pairs.
pub fn exact_alpha0_energy(n: usize, n_pairs: usize, l: usize, delta: f64, j: f64) -> Result<f64> {
    if !n.is_multiple_of(2) {
        return Err(Error::invalid(format!("closed form needs an even particle number, got {n}")));
    }
    if 2 * n_pairs > n {
        return Err(Error::invalid(format!("{n_pairs} pairs exceed N/2 = {}", n / 2)));
    }
    let movers = n - 2 * n_pairs;
    if movers + n_pairs > l {
        return Err(Error::invalid(format!("{movers} singles and {n_pairs} pairs do not fit on {l} sites")));
    }
    Ok(if n_pairs == 0 { e_tg(n, l, j) } else { delta * n_pairs as f64 + e_well(movers, l - n_pairs, j) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alpha0Ground {
    pub n_pairs: usize,
    pub energy: f64,
    /// Below Δ1 the fully paired sector wins.
    pub delta1: f64,
    /// Above Δ2 the pair-free sector wins.
    pub delta2: f64,
    pub delta1_thermo: f64,
    pub delta2_thermo: f64,
}

pub fn alpha0_ground_sector(n: usize, l: usize, delta: f64, j: f64) -> Result<Alpha0Ground> {
    if n < 2 {
        return Err(Error::invalid("need at least one pair's worth of particles"));
    }
    let mut best: Option<(usize, f64)> = None;
    for np in 0..=n / 2 {
        let Ok(e) = exact_alpha0_energy(n, np, l, delta, j) else { continue };
        if best.is_none_or(|(_, b)| e < b - 1e-12) {
            best = Some((np, e));
        }
    }
    let (n_pairs, energy) =
        best.ok_or_else(|| Error::invalid(format!("no admissible pair number for N = {n}, L = {l}")))?;
    let half = n / 2;
    Ok(Alpha0Ground {
        n_pairs,
        energy,
        delta1: e_well(2, l - half + 1, j),
        delta2: e_tg(n, l, j) - e_well(n - 2, l - 1, j),
        delta1_thermo: -4.0 * j,
        delta2_thermo: -j * (1.0 + 3.0 * (PI * n as f64 / l as f64).cos()),
    })
}
