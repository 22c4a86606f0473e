//! Site-factorized (Gutzwiller) mean field for the two-boson-capped lattice
//! model: uniform and two-sublattice ansätze, closed-form phase boundaries and
//! 2-D phase-diagram scans.

mod bipartite;
mod boundaries;
mod nelder_mead;
mod scan;
mod uniform;

pub use bipartite::{bipartite_energy, minimize_bipartite};
pub use boundaries::{analytic_boundary, BoundaryKind, BoundaryParams};
pub use scan::{label_phase, phase_diagram_scan, Ansatz, PhaseLabel, PhasePoint, PhaseScan, ScanAxis, ScanGrid};
pub use uniform::{minimize_uniform, uniform_energy};

use serde::{Deserialize, Serialize};

/// Coherence and imbalance below these count as zero when labelling phases.
pub const COHERENCE_THRESHOLD: f64 = 1e-6;
pub const IMBALANCE_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ansatz", rename_all = "snake_case")]
pub enum Amplitudes {
    /// (ψ0, ψ1, ψ2) on every site.
    Uniform { psi: [f64; 3] },
    /// (c0, c1, c2) on sublattice C (density n+m), (d0, d1, d2) on D (n−m).
    Bipartite { c: [f64; 3], d: [f64; 3], m: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GutzwillerSolution {
    pub amplitudes: Amplitudes,
    pub energy_per_site: f64,
    /// ⟨b†_i⟩⟨b_j⟩ for neighbouring sites.
    pub g1: f64,
    /// ⟨(b†_i)²⟩⟨b_j²⟩ for neighbouring sites.
    pub g1_pair: f64,
    pub imbalance: f64,
    /// d²e/dn² of the optimized energy.
    pub stability: f64,
}

/// Amplitudes fixed by normalization and density: ψ0² = 1 − n + ψ2²,
/// ψ1² = n − 2ψ2².
#[inline]
pub(crate) fn amplitudes(psi2: f64, n: f64) -> [f64; 3] {
    [(1.0 - n + psi2 * psi2).max(0.0).sqrt(), (n - 2.0 * psi2 * psi2).max(0.0).sqrt(), psi2]
}

/// Allowed interval for ψ2 at density n.
#[inline]
pub(crate) fn psi2_domain(n: f64) -> (f64, f64) {
    ((n - 1.0).max(0.0).sqrt(), (0.5 * n).max(0.0).sqrt())
}

/// ⟨b⟩ and ⟨α^ρ-weighted b⟩ for one site: (ψ0ψ1 + √2ψ1ψ2, ψ0ψ1 + √2αψ1ψ2).
#[inline]
pub(crate) fn single_coherences(p: &[f64; 3], alpha: f64) -> (f64, f64) {
    let s2 = std::f64::consts::SQRT_2;
    (p[0] * p[1] + s2 * p[1] * p[2], p[0] * p[1] + s2 * alpha * p[1] * p[2])
}

/// d²e/dn² by central differences with step 1e-3, one-sided at the edges.
pub(crate) fn second_derivative(e: impl Fn(f64) -> f64, n: f64) -> f64 {
    let h = 1e-3;
    let (a, b, c) = if n - h <= 0.0 {
        (n, n + h, n + 2.0 * h)
    } else if n + h >= 2.0 {
        (n - 2.0 * h, n - h, n)
    } else {
        (n - h, n, n + h)
    };
    (e(a) - 2.0 * e(b) + e(c)) / (h * h)
}
