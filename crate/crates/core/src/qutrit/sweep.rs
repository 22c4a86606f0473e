use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    coherence::{dielectric_rate, flux_dephasing_time_in, Dephasing},
    extract::{extract_qutrit, DEFAULT_SCAN_LEVELS},
    resonance::find_resonant_flux_in,
    CoherenceParams, LevelPolicy, QutritDescriptor, Resonance,
};
use crate::circuit::{CircuitSpec, FluxoniumBasis, Spectrum, DEFAULT_BASIS_SIZE, DEFAULT_LEVELS};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    EJ,
    EL,
    Flux,
}

impl SweepAxis {
    fn apply(self, spec: &mut CircuitSpec, v: f64) {
        match self {
            SweepAxis::EJ => spec.e_j = v,
            SweepAxis::EL => spec.e_l = v,
            SweepAxis::Flux => spec.flux = v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl SweepGrid {
    pub fn linspace(axis: SweepAxis, lo: f64, hi: f64, n: usize) -> Self {
        let values = (0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect();
        Self { axis, values }
    }
}

/// Which Δ = 0 root to keep when a point has several.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootChoice {
    Largest,
    Smallest,
    /// The root whose 0↔1 / 1↔2 plasmon-fluxon labels match, e.g. "PF".
    Regime(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRequest {
    pub x: SweepGrid,
    pub y: SweepGrid,
    pub fixed: CircuitSpec,
    pub policy: LevelPolicy,
    pub auto_resonance: bool,
    pub root: RootChoice,
    pub coherence: CoherenceParams,
    pub basis_size: usize,
    pub resonance_grid: usize,
}

impl SweepRequest {
    pub fn new(x: SweepGrid, y: SweepGrid, fixed: CircuitSpec, policy: LevelPolicy) -> Self {
        Self {
            x,
            y,
            fixed,
            policy,
            auto_resonance: true,
            root: RootChoice::Largest,
            coherence: CoherenceParams::default(),
            basis_size: DEFAULT_BASIS_SIZE,
            resonance_grid: 101,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    NoResonance,
    Failed(String),
}

/// Qutrit transitions in the order 0↔1, 1↔2, 0↔2.
pub const TRANSITIONS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub ix: usize,
    pub iy: usize,
    pub spec: CircuitSpec,
    pub descriptor: Option<QutritDescriptor>,
    /// T_diel per qutrit transition (µs), see [`TRANSITIONS`].
    pub t_diel_us: Option<[f64; 3]>,
    pub t_phi: Option<[Dephasing; 3]>,
    pub status: RowStatus,
}

impl SweepRow {
    /// Shortest dielectric lifetime and its qutrit transition.
    pub fn limiting_diel(&self) -> Option<(f64, (usize, usize))> {
        let t = self.t_diel_us?;
        argmin(&t).map(|i| (t[i], TRANSITIONS[i]))
    }

    pub fn limiting_phi(&self) -> Option<(f64, (usize, usize))> {
        let t = self.t_phi?.map(|d| d.t_phi_us());
        argmin(&t).map(|i| (t[i], TRANSITIONS[i]))
    }
}

fn argmin(v: &[f64; 3]) -> Option<usize> {
    (0..3).min_by(|&a, &b| v[a].total_cmp(&v[b]))
}

/// Pick a root per `choice`; labels need a spectrum per candidate.
pub fn choose_root(
    basis: &FluxoniumBasis,
    spec: &CircuitSpec,
    policy: LevelPolicy,
    roots: &[f64],
    choice: &RootChoice,
) -> Result<Option<f64>> {
    Ok(match choice {
        RootChoice::Largest => roots.last().copied(),
        RootChoice::Smallest => roots.first().copied(),
        RootChoice::Regime(label) => {
            let mut hit = None;
            for &r in roots {
                let s = basis.solve(spec.e_j, r, DEFAULT_LEVELS);
                if extract_qutrit(&s, policy, DEFAULT_SCAN_LEVELS)?.regime_label().eq_ignore_ascii_case(label) {
                    hit = Some(r);
                    break;
                }
            }
            hit
        }
    })
}

/// Full descriptor + coherence evaluation at one operating point.
pub(crate) fn evaluate_point(
    basis: &FluxoniumBasis,
    spec: &CircuitSpec,
    policy: LevelPolicy,
    coh: &CoherenceParams,
) -> Result<(Spectrum, QutritDescriptor, [f64; 3], [Dephasing; 3])> {
    let spectrum = basis.solve(spec.e_j, spec.flux, DEFAULT_LEVELS);
    let d = extract_qutrit(&spectrum, policy, DEFAULT_SCAN_LEVELS)?;
    let q = d.levels;
    let mut t_diel = [0.0; 3];
    let mut t_phi = [Dephasing::HigherOrderLimited { slope: 0.0 }; 3];
    for (k, &(a, b)) in TRANSITIONS.iter().enumerate() {
        t_diel[k] = dielectric_rate(&spectrum, q[a], q[b], coh)?.t1_us;
        t_phi[k] = flux_dephasing_time_in(basis, spec, q[a], q[b], coh)?;
    }
    Ok((spectrum, d, t_diel, t_phi))
}

/// Descriptor table over a 2-D grid of circuit parameters. Per-point
/// failures are recorded in the row; only malformed requests are errors.
pub fn sweep_parameters(req: &SweepRequest) -> Result<Vec<SweepRow>> {
    if req.x.values.len() < 2 || req.y.values.len() < 2 {
        return Err(Error::invalid("each sweep axis needs at least 2 values"));
    }
    if req.x.axis == req.y.axis {
        return Err(Error::invalid("sweep axes must differ"));
    }
    if req.auto_resonance && (req.x.axis == SweepAxis::Flux || req.y.axis == SweepAxis::Flux) {
        return Err(Error::invalid("auto_resonance solves for the flux; it cannot also be a sweep axis"));
    }
    req.coherence.validate()?;
    let nx = req.x.values.len();
    let points: Vec<(usize, usize)> = (0..req.y.values.len()).flat_map(|iy| (0..nx).map(move |ix| (ix, iy))).collect();

    Ok(points
        .par_iter()
        .map(|&(ix, iy)| {
            let mut spec = req.fixed;
            req.x.axis.apply(&mut spec, req.x.values[ix]);
            req.y.axis.apply(&mut spec, req.y.values[iy]);
            let mut row =
                SweepRow { ix, iy, spec, descriptor: None, t_diel_us: None, t_phi: None, status: RowStatus::Ok };
            match sweep_point(req, &mut row.spec) {
                Ok(Some((d, td, tp))) => {
                    row.descriptor = Some(d);
                    row.t_diel_us = Some(td);
                    row.t_phi = Some(tp);
                }
                Ok(None) => row.status = RowStatus::NoResonance,
                Err(e) => row.status = RowStatus::Failed(e.to_string()),
            }
            row
        })
        .collect())
}

type PointResult = Option<(QutritDescriptor, [f64; 3], [Dephasing; 3])>;

fn sweep_point(req: &SweepRequest, spec: &mut CircuitSpec) -> Result<PointResult> {
    spec.validate()?;
    let basis = FluxoniumBasis::new(spec.e_c, spec.e_l, req.basis_size)?;
    if req.auto_resonance {
        match find_resonant_flux_in(&basis, spec.e_j, req.policy, (0.0, 0.5), req.resonance_grid)? {
            Resonance::Everywhere => {}
            Resonance::Roots(roots) => match choose_root(&basis, spec, req.policy, &roots, &req.root)? {
                Some(f) => spec.flux = f,
                None => return Ok(None),
            },
        }
    }
    let (_, d, td, tp) = evaluate_point(&basis, spec, req.policy, &req.coherence)?;
    Ok(Some((d, td, tp)))
}
