use serde::{Deserialize, Serialize};

use super::CouplingSpec;
use crate::error::{Error, Result};
use crate::qutrit::QutritDescriptor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Extended Bose–Hubbard model with at most two bosons per site:
///
/// H = −J Σ α^{ρ_i+ρ_j−1}(b†_i b_j + h.c.) − (P/2) Σ ((b†_i)² b_j² + h.c.)
///     + (Δ/2) Σ ρ(ρ−1) + s Σ W(ρ_i) W(ρ_j),
///
/// with W(ρ) = W0 + δW_ρ and s = `w_sign`, the sign of the inductive coupling
/// (δW's are imaginary for g_L < 0; only their products enter).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeModel {
    pub n_sites: usize,
    pub bonds: Vec<(usize, usize)>,
    pub boundary: Boundary,
    pub j_hop: f64,
    pub alpha: f64,
    pub p_hop: f64,
    pub delta: f64,
    #[serde(default)]
    pub w0: f64,
    #[serde(default)]
    pub dw1: f64,
    #[serde(default)]
    pub dw2: f64,
    #[serde(default = "one")]
    pub w_sign: f64,
}

fn one() -> f64 {
    1.0
}

impl LatticeModel {
    /// Nearest-neighbour chain with J = 1, α = 1 and everything else zero.
    pub fn chain(n_sites: usize, boundary: Boundary) -> Self {
        let mut bonds: Vec<(usize, usize)> = (0..n_sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if boundary == Boundary::Periodic && n_sites > 2 {
            bonds.push((n_sites - 1, 0));
        }
        Self {
            n_sites,
            bonds,
            boundary,
            j_hop: 1.0,
            alpha: 1.0,
            p_hop: 0.0,
            delta: 0.0,
            w0: 0.0,
            dw1: 0.0,
            dw2: 0.0,
            w_sign: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::invalid("lattice needs at least one site"));
        }
        for &(i, j) in &self.bonds {
            if i >= self.n_sites || j >= self.n_sites || i == j {
                return Err(Error::invalid(format!("bond ({i}, {j}) invalid for {} sites", self.n_sites)));
            }
        }
        let vals = [self.j_hop, self.alpha, self.p_hop, self.delta, self.w0, self.dw1, self.dw2];
        if !vals.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        if self.w_sign.abs() != 1.0 {
            return Err(Error::invalid("w_sign must be +1 or -1"));
        }
        Ok(())
    }

    /// W(ρ) for ρ ∈ {0, 1, 2}.
    #[inline]
    pub fn w(&self, rho: u8) -> f64 {
        match rho {
            0 => self.w0,
            1 => self.w0 + self.dw1,
            _ => self.w0 + self.dw2,
        }
    }

    pub fn has_w_term(&self) -> bool {
        self.w0 != 0.0 || self.dw1 != 0.0 || self.dw2 != 0.0
    }

    /// Mean coordination number 2·bonds/sites.
    pub fn coordination(&self) -> f64 {
        2.0 * self.bonds.len() as f64 / self.n_sites as f64
    }

    /// Two-colouring of the bond graph, if one exists.
    pub fn sublattices(&self) -> Option<Vec<u8>> {
        let mut adj = vec![Vec::new(); self.n_sites];
        for &(i, j) in &self.bonds {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut color = vec![u8::MAX; self.n_sites];
        for start in 0..self.n_sites {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        stack.push(v);
                    } else if color[v] == color[u] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }

    pub fn is_bipartite(&self) -> bool {
        self.sublattices().is_some()
    }
}

/// Lattice constants from one qutrit and one coupling channel:
/// capacitive J = −g_C|n10|², P = −g_C|n20|², no W term;
/// inductive J = −g_L|φ10|², P = −g_L|φ20|², W_r = sqrt(|g_L|)·φ_rr.
pub fn build_lattice_model(
    q: &QutritDescriptor,
    c: &CouplingSpec,
    n_sites: usize,
    bonds: Vec<(usize, usize)>,
    boundary: Boundary,
) -> Result<LatticeModel> {
    c.require_single()?;
    let e = &q.elements;
    let mut m = LatticeModel {
        n_sites,
        bonds,
        boundary,
        j_hop: 0.0,
        alpha: q.alpha,
        p_hop: 0.0,
        delta: q.delta_hubbard,
        w0: 0.0,
        dw1: 0.0,
        dw2: 0.0,
        w_sign: 1.0,
    };
    if c.g_c != 0.0 {
        m.j_hop = -c.g_c * e.n10 * e.n10;
        m.p_hop = -c.g_c * e.n20 * e.n20;
    } else {
        m.j_hop = -c.g_l * e.phi10 * e.phi10;
        m.p_hop = -c.g_l * e.phi20 * e.phi20;
        m.alpha = q.alpha_inductive;
        let s = c.g_l.abs().sqrt();
        m.w0 = s * e.phi_diag[0];
        m.dw1 = s * (e.phi_diag[1] - e.phi_diag[0]);
        m.dw2 = s * (e.phi_diag[2] - e.phi_diag[0]);
        m.w_sign = c.g_l.signum();
    }
    m.validate()?;
    Ok(m)
}
