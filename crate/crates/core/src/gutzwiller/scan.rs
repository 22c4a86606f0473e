use super::{minimize_bipartite, minimize_uniform, GutzwillerSolution, COHERENCE_THRESHOLD, IMBALANCE_THRESHOLD};
use crate::effective::LatticeModel;
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ansatz {
    Uniform,
    Bipartite,
}

/// Parameter varied along one scan axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanAxis {
    Alpha,
    Delta,
    JHop,
    PHop,
    /// P in units of J.
    POverJ,
    /// Δ in units of zJ.
    DeltaOverZj,
    /// Signed δW2²/P; a negative value flips the sign of the W term.
    Dw2SqOverP,
    /// (Δ − zδW1²)/(zP).
    ReducedDelta,
}

impl ScanAxis {
    /// Derived axes depend on other parameters and are applied last.
    fn is_derived(self) -> bool {
        matches!(self, ScanAxis::Dw2SqOverP | ScanAxis::ReducedDelta)
    }

    fn apply(self, m: &mut LatticeModel, v: f64, z: f64) {
        match self {
            ScanAxis::Alpha => m.alpha = v,
            ScanAxis::Delta => m.delta = v,
            ScanAxis::JHop => m.j_hop = v,
            ScanAxis::PHop => m.p_hop = v,
            ScanAxis::POverJ => m.p_hop = v * m.j_hop,
            ScanAxis::DeltaOverZj => m.delta = v * z * m.j_hop,
            ScanAxis::Dw2SqOverP => {
                m.w_sign = if v < 0.0 { -1.0 } else { 1.0 };
                m.dw2 = (v.abs() * m.p_hop).sqrt();
            }
            ScanAxis::ReducedDelta => m.delta = z * m.w_sign * m.dw1 * m.dw1 + v * z * m.p_hop,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub axis: ScanAxis,
    pub values: Vec<f64>,
}

impl ScanGrid {
    pub fn linspace(axis: ScanAxis, lo: f64, hi: f64, n: usize) -> Self {
        let values = (0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect();
        ScanGrid { axis, values }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    #[serde(rename = "SF")]
    Superfluid,
    #[serde(rename = "PSF")]
    PairSuperfluid,
    #[serde(rename = "PCB")]
    PairCheckerboard,
    #[serde(rename = "MI")]
    MottInsulator,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseLabel::Superfluid => "SF",
            PhaseLabel::PairSuperfluid => "PSF",
            PhaseLabel::PairCheckerboard => "PCB",
            PhaseLabel::MottInsulator => "MI",
        })
    }
}

/// Order-parameter labelling: any single-particle coherence is SF, otherwise
/// pair coherence is PSF; insulators split by sublattice imbalance.
pub fn label_phase(s: &GutzwillerSolution) -> PhaseLabel {
    if s.g1 > COHERENCE_THRESHOLD {
        PhaseLabel::Superfluid
    } else if s.g1_pair > COHERENCE_THRESHOLD {
        PhaseLabel::PairSuperfluid
    } else if s.imbalance.abs() > IMBALANCE_THRESHOLD {
        PhaseLabel::PairCheckerboard
    } else {
        PhaseLabel::MottInsulator
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    pub y: f64,
    pub model: LatticeModel,
    pub solution: Option<GutzwillerSolution>,
    pub label: Option<PhaseLabel>,
    /// d²e/dn² < 0.
    pub unstable: bool,
    /// g1 − g1_pair.
    pub coherence_difference: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseScan {
    pub x: ScanGrid,
    pub y: ScanGrid,
    pub n: f64,
    pub z: f64,
    pub ansatz: Ansatz,
    /// Row-major with x fastest.
    pub points: Vec<PhasePoint>,
}

impl PhaseScan {
    pub fn at(&self, ix: usize, iy: usize) -> &PhasePoint {
        &self.points[iy * self.x.values.len() + ix]
    }

    pub fn label_at(&self, ix: usize, iy: usize) -> Option<PhaseLabel> {
        self.at(ix, iy).label
    }
}

pub fn phase_diagram_scan(
    x: &ScanGrid,
    y: &ScanGrid,
    n: f64,
    z: f64,
    template: &LatticeModel,
    ansatz: Ansatz,
) -> Result<PhaseScan> {
    if x.values.len() < 16 || y.values.len() < 16 {
        return Err(Error::invalid("phase-diagram grids need at least 16 points per axis"));
    }
    if x.axis == y.axis {
        return Err(Error::invalid("scan axes must differ"));
    }
    if x.values.iter().chain(&y.values).any(|v| !v.is_finite()) {
        return Err(Error::invalid("scan values must be finite"));
    }
    if !(n > 0.0 && n < 2.0) || !(z > 0.0) {
        return Err(Error::invalid(format!("need n in (0, 2) and z > 0, got n = {n}, z = {z}")));
    }
    let (nx, ny) = (x.values.len(), y.values.len());
    let points = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (ix, iy) = (k % nx, k / nx);
            let (xv, yv) = (x.values[ix], y.values[iy]);
            let mut model = template.clone();
            let mut axes = [(x.axis, xv), (y.axis, yv)];
            axes.sort_by_key(|(a, _)| a.is_derived());
            for (a, v) in axes {
                a.apply(&mut model, v, z);
            }
            let result = model.validate().and_then(|_| match ansatz {
                Ansatz::Uniform => minimize_uniform(n, z, &model),
                Ansatz::Bipartite => minimize_bipartite(n, z, &model),
            });
            match result {
                Ok(s) => PhasePoint {
                    ix,
                    iy,
                    x: xv,
                    y: yv,
                    model,
                    label: Some(label_phase(&s)),
                    unstable: s.stability < 0.0,
                    coherence_difference: s.g1 - s.g1_pair,
                    solution: Some(s),
                    error: None,
                },
                Err(e) => {
                    log::warn!("phase scan point ({ix}, {iy}) failed: {e}");
                    PhasePoint {
                        ix,
                        iy,
                        x: xv,
                        y: yv,
                        model,
                        solution: None,
                        label: None,
                        unstable: false,
                        coherence_difference: f64::NAN,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    Ok(PhaseScan { x: x.clone(), y: y.clone(), n, z, ansatz, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::Boundary;

    #[test]
    fn labels_follow_order_parameters() {
        let base = GutzwillerSolution {
            amplitudes: super::super::Amplitudes::Uniform { psi: [0.0, 1.0, 0.0] },
            energy_per_site: 0.0,
            g1: 0.0,
            g1_pair: 0.0,
            imbalance: 0.0,
            stability: 1.0,
        };
        assert_eq!(label_phase(&base), PhaseLabel::MottInsulator);
        assert_eq!(label_phase(&GutzwillerSolution { imbalance: 1.0, ..base }), PhaseLabel::PairCheckerboard);
        assert_eq!(label_phase(&GutzwillerSolution { g1_pair: 0.5, ..base }), PhaseLabel::PairSuperfluid);
        assert_eq!(label_phase(&GutzwillerSolution { g1: 0.1, g1_pair: 0.5, ..base }), PhaseLabel::Superfluid);
    }

    #[test]
    fn derived_axes_and_small_grids() {
        let t = LatticeModel { j_hop: 0.0, p_hop: 2.0, dw1: 0.5, ..LatticeModel::chain(2, Boundary::Periodic) };
        let mut m = t.clone();
        ScanAxis::Dw2SqOverP.apply(&mut m, -1.5, 2.0);
        ScanAxis::ReducedDelta.apply(&mut m, 0.25, 2.0);
        assert_eq!(m.w_sign, -1.0);
        assert!((m.dw2 * m.dw2 - 3.0).abs() < 1e-12);
        assert!((m.delta - (2.0 * -0.25 + 0.25 * 2.0 * 2.0)).abs() < 1e-12);
        let g = ScanGrid::linspace(ScanAxis::Alpha, 0.0, 1.0, 8);
        let h = ScanGrid::linspace(ScanAxis::Delta, 0.0, 1.0, 16);
        assert!(phase_diagram_scan(&g, &h, 1.0, 2.0, &t, Ansatz::Uniform).is_err());
    }
}
