//! Physical constants. Energies in this crate are linear frequencies in GHz;
//! angular frequencies only appear inside rate formulas.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const H_PLANCK: f64 = 6.626_070_15e-34;
/// Flux quantum h/2e in Wb.
pub const PHI0: f64 = 2.067_833_848e-15;

/// GHz (linear) to rad/ns.
#[inline]
pub fn angular(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz
}

/// Rate in 1/ns to lifetime in µs; zero rate maps to infinity.
#[inline]
pub fn lifetime_us(rate_per_ns: f64) -> f64 {
    if rate_per_ns == 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate_per_ns / 1e3
    }
}
