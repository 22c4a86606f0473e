use serde::{Deserialize, Serialize};

use super::CoherenceParams;
use crate::circuit::{CircuitSpec, FluxoniumBasis, Spectrum, DEFAULT_BASIS_SIZE};
use crate::error::{Error, Result};
use crate::units::{angular, lifetime_us};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DielectricLoss {
    pub rate_per_us: f64,
    /// Infinite when the phase matrix element vanishes.
    pub t1_us: f64,
}

/// Fermi's golden rule for dielectric loss:
/// Γ = (ω²/4E_C)|φ_ab|² tanδ(ω) coth(ħω/2k_BT), all in angular units.
pub fn dielectric_rate(spectrum: &Spectrum, a: usize, b: usize, coh: &CoherenceParams) -> Result<DielectricLoss> {
    coh.validate()?;
    if !(spectrum.e_c > 0.0) {
        return Err(Error::invalid("charging energy must be positive"));
    }
    let f = spectrum.omega(a, b).abs();
    if f == 0.0 {
        return Err(Error::invalid(format!("levels {a} and {b} are degenerate")));
    }
    let w = angular(f);
    let e_c = angular(spectrum.e_c);
    let tan_delta = coh.loss_tangent_amp * (f / coh.loss_tangent_pivot).powf(coh.loss_tangent_exp);
    let x = coh.hbar * w * 1e9 / (2.0 * coh.k_b * coh.temperature);
    let coth = 1.0 / x.tanh();
    let gamma_per_ns = w * w / (4.0 * e_c) * spectrum.phi(a, b).norm_sqr() * tan_delta * coth;
    Ok(DielectricLoss { rate_per_us: gamma_per_ns * 1e3, t1_us: lifetime_us(gamma_per_ns) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dephasing {
    Limited {
        t_phi_us: f64,
        slope: f64,
    },
    /// First-order insensitive point: |∂f/∂Φ| < 1e-4 GHz/Φ0.
    HigherOrderLimited {
        slope: f64,
    },
}

impl Dephasing {
    pub fn t_phi_us(&self) -> f64 {
        match self {
            Dephasing::Limited { t_phi_us, .. } => *t_phi_us,
            Dephasing::HigherOrderLimited { .. } => f64::INFINITY,
        }
    }
}

const FLUX_STEP: f64 = 1e-5;
const SWEET_SPOT_SLOPE: f64 = 1e-4;

/// 1/T_Φ = A·|∂ω_ab/∂Φ|, derivative by a Richardson-extrapolated central
/// difference.
pub fn flux_dephasing_time(spec: &CircuitSpec, a: usize, b: usize, coh: &CoherenceParams) -> Result<Dephasing> {
    spec.validate()?;
    let basis = FluxoniumBasis::new(spec.e_c, spec.e_l, DEFAULT_BASIS_SIZE)?;
    flux_dephasing_time_in(&basis, spec, a, b, coh)
}

pub fn flux_dephasing_time_in(
    basis: &FluxoniumBasis,
    spec: &CircuitSpec,
    a: usize,
    b: usize,
    coh: &CoherenceParams,
) -> Result<Dephasing> {
    coh.validate()?;
    let n = a.max(b) + 1;
    let freq = |flux: f64| {
        let e = basis.energies(spec.e_j, flux, n);
        e[b] - e[a]
    };
    let central = |h: f64| (freq(spec.flux + h) - freq(spec.flux - h)) / (2.0 * h);
    let d1 = central(FLUX_STEP);
    let d2 = central(0.5 * FLUX_STEP);
    let slope = (4.0 * d2 - d1) / 3.0;
    if slope.abs() < SWEET_SPOT_SLOPE {
        return Ok(Dephasing::HigherOrderLimited { slope });
    }
    if (d1 - d2).abs() > 0.01 * d2.abs() {
        return Err(Error::Numerical(format!("flux derivative not converged: {d1} vs {d2} GHz/Φ0")));
    }
    let rate_per_ns = coh.flux_noise_amp * angular(slope.abs());
    Ok(Dephasing::Limited { t_phi_us: lifetime_us(rate_per_ns), slope })
}
