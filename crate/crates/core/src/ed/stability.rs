use super::{solve_ground_state, EigenOptions};
use crate::effective::LatticeModel;
use crate::error::{Error, Result};

/// E(N+2) + E(N−2) − 2E(N); negative when adding pairs is favourable
/// (phase separation).
pub fn stability_check(model: &LatticeModel, n_particles: usize, opts: &EigenOptions) -> Result<f64> {
    if n_particles < 2 || n_particles + 2 > 2 * model.n_sites {
        return Err(Error::Precondition(format!(
            "N ± 2 must lie in [0, {}], got N = {n_particles}",
            2 * model.n_sites
        )));
    }
    let e = |n: usize| solve_ground_state(model, n, opts).map(|g| g.energy);
    Ok(e(n_particles + 2)? + e(n_particles - 2)? - 2.0 * e(n_particles)?)
}
