use crate::effective::LatticeModel;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Closed-form phase boundaries of the mean-field functional. Each kind
/// returns the critical value of the quantity named in its doc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// Δ below which the pair superfluid sets in.
    PsfOnsetDelta,
    /// Δ above which the n = 1 Mott insulator wins.
    MottDelta,
    /// P above which pairs condense.
    SfPsfPcrit,
    /// α at the edge of the Mott rectangle.
    MottRectAlpha,
    /// P at the top of the Mott rectangle.
    MottRectP,
    /// Δ of the checkerboard / Mott transition (J = 0).
    PcbMiDelta,
    /// P of the pair superfluid / checkerboard transition (J = 0).
    PsfPcbP,
    /// Δ of the pair superfluid / Mott transition (J = 0).
    PsfMiJ0,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 8] = [
        BoundaryKind::PsfOnsetDelta,
        BoundaryKind::MottDelta,
        BoundaryKind::SfPsfPcrit,
        BoundaryKind::MottRectAlpha,
        BoundaryKind::MottRectP,
        BoundaryKind::PcbMiDelta,
        BoundaryKind::PsfPcbP,
        BoundaryKind::PsfMiJ0,
    ];

    fn needs_zero_hopping(self) -> bool {
        matches!(self, BoundaryKind::PcbMiDelta | BoundaryKind::PsfPcbP | BoundaryKind::PsfMiJ0)
    }
}

/// Inputs to the closed forms. `dw1_sq`, `dw2_sq` are signed: they carry the
/// sign of the inductive coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryParams {
    pub n: f64,
    pub z: f64,
    pub j_hop: f64,
    pub alpha: f64,
    pub p_hop: f64,
    pub delta: f64,
    pub dw1_sq: f64,
    pub dw2_sq: f64,
}

impl Default for BoundaryParams {
    fn default() -> Self {
        BoundaryParams { n: 1.0, z: 2.0, j_hop: 1.0, alpha: 0.0, p_hop: 0.0, delta: 0.0, dw1_sq: 0.0, dw2_sq: 0.0 }
    }
}

impl BoundaryParams {
    pub fn from_model(model: &LatticeModel, n: f64, z: f64) -> Self {
        BoundaryParams {
            n,
            z,
            j_hop: model.j_hop,
            alpha: model.alpha,
            p_hop: model.p_hop,
            delta: model.delta,
            dw1_sq: model.w_sign * model.dw1 * model.dw1,
            dw2_sq: model.w_sign * model.dw2 * model.dw2,
        }
    }
}

pub fn analytic_boundary(kind: BoundaryKind, p: &BoundaryParams) -> Result<f64> {
    use BoundaryKind::*;
    let mismatch = |why: &str| Err(Error::Precondition(format!("{kind:?}: {why}")));
    if !(p.z > 0.0) {
        return mismatch("coordination must be positive");
    }
    if !(p.n > 0.0 && p.n < 2.0) {
        return mismatch("density must lie in (0, 2)");
    }
    if kind.needs_zero_hopping() && p.j_hop != 0.0 {
        return mismatch("defined only at J = 0");
    }
    if matches!(kind, MottDelta | MottRectAlpha | MottRectP | PcbMiDelta | PsfPcbP | PsfMiJ0) && p.n != 1.0 {
        return mismatch("defined only at unit filling");
    }
    let (n, z, j, a) = (p.n, p.z, p.j_hop, p.alpha);
    let pair_amp = ((n - 0.5 * n * n).sqrt() + n * a).powi(2);
    Ok(match kind {
        PsfOnsetDelta => -(2.0 * z * j / n) * pair_amp,
        MottDelta => z * j * (1.0 + SQRT_2 * a).powi(2),
        SfPsfPcrit => (2.0 * j / n) * pair_amp + p.delta / z,
        MottRectAlpha => {
            if j <= 0.0 || p.delta < 0.0 {
                return mismatch("needs J > 0 and Δ ≥ 0");
            }
            (p.delta / (2.0 * z * j)).sqrt() - 1.0 / SQRT_2
        }
        MottRectP => 2.0 * p.delta / z,
        PcbMiDelta => z * p.dw1_sq,
        PsfPcbP => 0.5 * p.dw2_sq,
        PsfMiJ0 => z * p.dw1_sq + 0.5 * z * p.p_hop - 0.25 * z * p.dw2_sq,
    })
}
