//! Small dense helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

/// Eigenpairs of a Hermitian matrix sorted by ascending eigenvalue.
pub fn eigh_sorted<T>(m: DMatrix<T>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])].clone());
    (vals, vecs)
}

/// Ascending eigenvalues only.
pub fn eigvalsh_sorted<T>(m: DMatrix<T>) -> Vec<f64>
where
    T: ComplexField<RealField = f64>,
{
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn real_to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `exp(-i H t)` applied to `v` for real symmetric `H` given its eigensystem.
pub fn propagate_eigen(vals: &[f64], vecs: &DMatrix<f64>, v: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
    let n = vals.len();
    let mut coef = DVector::<Complex64>::zeros(n);
    for k in 0..n {
        let mut c = Complex64::new(0.0, 0.0);
        for r in 0..vecs.nrows() {
            c += v[r] * vecs[(r, k)];
        }
        coef[k] = c * Complex64::from_polar(1.0, -vals[k] * t);
    }
    let mut out = DVector::<Complex64>::zeros(vecs.nrows());
    for k in 0..n {
        for r in 0..vecs.nrows() {
            out[r] += coef[k] * vecs[(r, k)];
        }
    }
    out
}
