//! Small dense-matrix helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMatrix, Error, Result};

/// Condition threshold above which a matrix is reported as singular.
pub const COND_MAX: f64 = 1e12;

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a square matrix, failing with `SingularMatrix` when the
/// condition number exceeds [`COND_MAX`]. `z` is only used for the report.
pub fn checked_inverse(m: &CMatrix, z: Complex64) -> Result<CMatrix> {
    let cond = condition_number(m);
    if !(cond <= COND_MAX) {
        return Err(Error::SingularMatrix { z, condition: cond });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::SingularMatrix { z, condition: cond })
}

/// Sub-matrix on the given rows and columns (in the given order).
pub fn select(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Diagonal 0/1 projection onto the listed indices.
pub fn projection(n: usize, onto: &[usize]) -> CMatrix {
    let mut p = CMatrix::zeros(n, n);
    for &i in onto {
        p[(i, i)] = Complex64::new(1.0, 0.0);
    }
    p
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖A*A − I‖_F`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    frobenius(&(m.adjoint() * m - identity(m.nrows())))
}

/// Real part of a matrix whose entries are known to be real.
pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}
