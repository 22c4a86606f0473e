use std::f64::consts::{PI, SQRT_2};

use super::{LevelPolicy, QutritDescriptor, QutritElements, Regime};
use crate::circuit::Spectrum;
use crate::error::{Error, Result};

pub const DEFAULT_SCAN_LEVELS: usize = 8;

/// Fluxon if the transition moves ⟨φ⟩ by more than π (a phase slip between
/// wells), plasmon otherwise.
pub fn classify_transition(spectrum: &Spectrum, a: usize, b: usize) -> Regime {
    if (spectrum.mean_phase(b) - spectrum.mean_phase(a)).abs() > PI {
        Regime::Fluxon
    } else {
        Regime::Plasmon
    }
}

pub fn extract_qutrit(spectrum: &Spectrum, policy: LevelPolicy, scan_levels: usize) -> Result<QutritDescriptor> {
    let q = policy.levels();
    let needed = scan_levels.max(q[2] + 1);
    if spectrum.n_levels() < needed {
        return Err(Error::Policy(format!(
            "spectrum has {} levels; policy {:?} with scan depth {scan_levels} needs {needed}",
            spectrum.n_levels(),
            policy
        )));
    }
    let e = &spectrum.energies;
    let omega10 = e[q[1]] - e[q[0]];
    let omega21 = e[q[2]] - e[q[1]];
    if !(omega10 > 0.0 && omega21 > 0.0) {
        return Err(Error::Policy("qutrit levels are not distinct".into()));
    }

    let mut best = (f64::INFINITY, 0.0, (0, 0));
    for abar in (0..scan_levels).filter(|l| !q.contains(l)) {
        for &b in &q {
            let signed = (e[abar] - e[b]).abs() - omega10;
            if signed.abs() < best.0 {
                best = (signed.abs(), signed, (abar, b));
            }
        }
    }

    let n = |a: usize, b: usize| spectrum.n(q[a], q[b]).norm();
    let phi = |a: usize, b: usize| spectrum.phi(q[a], q[b]).norm();
    let elements = QutritElements {
        n10: n(1, 0),
        n21: n(2, 1),
        n20: n(2, 0),
        phi10: phi(1, 0),
        phi21: phi(2, 1),
        phi20: phi(2, 0),
        phi_diag: [0, 1, 2].map(|a| spectrum.mean_phase(q[a])),
    };
    let el = &elements;
    let dw2 = |r: usize| (el.phi_diag[r] - el.phi_diag[0]).powi(2);
    let inductive_norm = el.phi10.powi(2) + el.phi20.powi(2);

    Ok(QutritDescriptor {
        levels: q,
        omega10,
        omega21,
        delta_hubbard: omega21 - omega10,
        delta_protect: best.0,
        delta_protect_signed: best.1,
        offending: best.2,
        alpha: el.n21 / (SQRT_2 * el.n10),
        alpha_inductive: el.phi21 / (SQRT_2 * el.phi10),
        p_over_j_cap: (el.n20 / el.n10).powi(2),
        p_over_j_ind: (el.phi20 / el.phi10).powi(2),
        w1: dw2(1) / inductive_norm,
        w2: dw2(2) / inductive_norm,
        regime_01: classify_transition(spectrum, q[0], q[1]),
        regime_12: classify_transition(spectrum, q[1], q[2]),
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{diagonalize_fluxonium, CircuitSpec};

    fn spectrum(e_j: f64, flux: f64) -> Spectrum {
        diagonalize_fluxonium(&CircuitSpec::new(0.6, e_j, 1.5, flux), 10, 150).unwrap()
    }

    #[test]
    fn plasmon_plasmon_row() {
        let d = extract_qutrit(&spectrum(2.2, 0.41317), LevelPolicy::LowestThree, 8).unwrap();
        assert!((d.alpha - 1.03).abs() < 0.05 * 1.03);
        assert!((d.p_over_j_cap - 0.29).abs() < 0.1 * 0.29);
        assert!((d.w1 - 1.40).abs() < 0.1 * 1.40, "w1 {}", d.w1);
        assert!((d.w2 - 1.22).abs() < 0.1 * 1.22, "w2 {}", d.w2);
        assert!((d.delta_protect - 0.393).abs() < 0.05 * 0.393);
        assert_eq!(d.regime_label(), "PP");
    }

    #[test]
    fn fluxon_fluxon_labels() {
        let s = spectrum(6.5, 0.446);
        assert_eq!(classify_transition(&s, 0, 1), Regime::Fluxon);
    }

    #[test]
    fn harmonic_selection_rules() {
        let d = extract_qutrit(&spectrum(0.0, 0.2), LevelPolicy::LowestThree, 8).unwrap();
        assert!((d.alpha - 1.0).abs() < 1e-9);
        assert!(d.p_over_j_cap < 1e-18);
        assert!(d.w1.abs() < 1e-12 && d.w2.abs() < 1e-12);
        assert_eq!(d.regime_label(), "PP");
    }

    #[test]
    fn too_few_levels_is_policy_error() {
        let s = spectrum(2.2, 0.41).truncated(3);
        assert!(matches!(extract_qutrit(&s, LevelPolicy::SkipSecond, 3), Err(Error::Policy(_))));
    }

    #[test]
    fn ratios_scale_free() {
        let mut s = spectrum(9.0, 0.393);
        let a = extract_qutrit(&s, LevelPolicy::SkipSecond, 8).unwrap();
        s.n_elems *= num_complex::Complex64::new(3.7, 0.0);
        let b = extract_qutrit(&s, LevelPolicy::SkipSecond, 8).unwrap();
        assert!((a.alpha - b.alpha).abs() < 1e-12 * a.alpha);
        assert!((a.p_over_j_cap - b.p_over_j_cap).abs() < 1e-12 * a.p_over_j_cap);
    }

    #[test]
    fn capacitive_and_inductive_ratios_related_by_frequencies() {
        // |n_ab| ∝ |ω_ab||φ_ab| makes P/J|_C = (ω20/ω10)² P/J|_L, i.e. exactly 4 at Δ = 0
        let s = spectrum(2.2, 0.3);
        let d = extract_qutrit(&s, LevelPolicy::LowestThree, 8).unwrap();
        let ratio = ((d.omega10 + d.omega21) / d.omega10).powi(2);
        assert!((d.p_over_j_cap / d.p_over_j_ind - ratio).abs() < 1e-6 * ratio);
        let alpha_ratio = d.omega21 / d.omega10;
        assert!((d.alpha / d.alpha_inductive - alpha_ratio).abs() < 1e-6);
    }
}
