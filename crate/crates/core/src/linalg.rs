//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Sylvester-Hadamard matrix of order `n` (a power of two), entries `+-1`.
pub fn hadamard(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "Hadamard order {n} is not a power of two"
        )));
    }
    let mut h = DMatrix::from_element(1, 1, 1.0);
    while h.nrows() < n {
        let k = h.nrows();
        let mut next = DMatrix::zeros(2 * k, 2 * k);
        for r in 0..k {
            for c in 0..k {
                let v = h[(r, c)];
                next[(r, c)] = v;
                next[(r, c + k)] = v;
                next[(r + k, c)] = v;
                next[(r + k, c + k)] = -v;
            }
        }
        h = next;
    }
    Ok(h)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Inverse of a square matrix, `None` when numerically singular.
pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    if m.nrows() != m.ncols() {
        return None;
    }
    let s = m.clone().svd(false, false).singular_values;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= max * 1e-12 {
        return None;
    }
    m.clone().try_inverse()
}

/// Right inverse `A^H (A A^H)^{-1}` of a full-row-rank matrix.
pub fn right_inverse(a: &CMatrix) -> Option<CMatrix> {
    let ah = a.adjoint();
    inverse(&(a * &ah)).map(|g| ah * g)
}

/// 2-norm condition number of a real matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = m.clone().svd(false, false).singular_values;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Principal square root of a real symmetric positive semidefinite matrix.
pub fn symmetric_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}
