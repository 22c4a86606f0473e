use crate::error::{Error, Result};

/// Element C⁻¹_{j,j+r} of an infinite chain with island capacitance `c_q`
/// and nearest-neighbour coupling capacitance `c_c`:
/// (1/(C_q+2C_c)) Σ_m binom(r+2m, m) x^{r+2m}, x = C_c/(C_q+2C_c).
pub fn inverse_capacitance_row(c_q: f64, c_c: f64, r: usize, m_max: usize) -> Result<f64> {
    if !(c_q > 0.0) || c_c < 0.0 {
        return Err(Error::invalid("need c_q > 0 and c_c >= 0"));
    }
    if c_c / c_q >= 0.5 {
        return Err(Error::invalid(format!("series requires c_c/c_q < 1/2, got {}", c_c / c_q)));
    }
    if m_max < 20 {
        return Err(Error::invalid(format!("m_max must be >= 20, got {m_max}")));
    }
    let diag = c_q + 2.0 * c_c;
    let x = c_c / diag;
    if x == 0.0 {
        return Ok(if r == 0 { 1.0 / c_q } else { 0.0 });
    }
    let rf = r as f64;
    // term_m = binom(r+2m, m) x^{r+2m}
    let mut term = x.powi(r as i32);
    let mut sum = term;
    for m in 0..m_max {
        let mf = m as f64;
        term *= (rf + 2.0 * mf + 1.0) * (rf + 2.0 * mf + 2.0) / ((mf + 1.0) * (rf + mf + 1.0)) * x * x;
        sum += term;
    }
    if term > 1e-14 * sum {
        return Err(Error::invalid(format!(
            "inverse-capacitance series not converged after {m_max} terms (last/sum = {:.2e})",
            term / sum
        )));
    }
    Ok(sum / diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn leading_order_at_weak_coupling() {
        let (c_q, c_c) = (1.0, 0.05);
        let v = inverse_capacitance_row(c_q, c_c, 1, 40).unwrap();
        let d = c_q + 2.0 * c_c;
        let lead = (1.0 / d) * (c_c / d);
        assert!((v - lead).abs() < 0.01 * lead);
    }

    #[test]
    fn decoupled_chain() {
        assert_eq!(inverse_capacitance_row(2.0, 0.0, 0, 20).unwrap(), 0.5);
        assert_eq!(inverse_capacitance_row(2.0, 0.0, 3, 20).unwrap(), 0.0);
    }

    #[test]
    fn matches_matrix_inverse_in_the_bulk() {
        let (c_q, c_c) = (1.0, 0.2);
        let n = 40;
        let c = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c_q + 2.0 * c_c
            } else if i.abs_diff(j) == 1 {
                -c_c
            } else {
                0.0
            }
        });
        let inv = c.try_inverse().unwrap();
        for r in 0..=3 {
            let series = inverse_capacitance_row(c_q, c_c, r, 60).unwrap();
            let bulk = inv[(20, 20 + r)];
            assert!((series - bulk).abs() < 1e-8 * bulk.abs(), "r={r}: {series} vs {bulk}");
        }
    }

    #[test]
    fn slow_series_is_rejected() {
        assert!(inverse_capacitance_row(1.0, 0.499, 1, 20).is_err());
        assert!(inverse_capacitance_row(1.0, 0.6, 1, 20).is_err());
    }
}
