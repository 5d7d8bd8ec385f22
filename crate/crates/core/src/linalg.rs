//! Small dense helpers shared by the operators and the solver.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

pub(crate) fn ensure_finite(m: MatRef<'_, f64>, context: &'static str) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite {
                    context,
                    index: j * m.nrows() + i,
                });
            }
        }
    }
    Ok(())
}

pub(crate) fn is_finite(m: MatRef<'_, f64>) -> bool {
    ensure_finite(m, "").is_ok()
}

/// Frobenius norm.
pub fn frobenius(m: MatRef<'_, f64>) -> f64 {
    m.norm_l2()
}

/// Frobenius norm of `a - b`.
pub fn frobenius_diff(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    debug_assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let d = a[(i, j)] - b[(i, j)];
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Euclidean norm of each column.
pub fn column_norms(m: MatRef<'_, f64>) -> Vec<f64> {
    (0..m.ncols()).map(|j| m.col(j).norm_l2()).collect()
}

/// Largest singular value.
pub fn spectral_norm(m: MatRef<'_, f64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let s = m
        .singular_values()
        .map_err(|e| Error::Backend(format!("{e:?}")))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// Sum of singular values.
pub fn nuclear_norm(m: MatRef<'_, f64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let s = m
        .singular_values()
        .map_err(|e| Error::Backend(format!("{e:?}")))?;
    Ok(s.iter().sum())
}

/// `(At * C)^T`, computed as `C^T * At^T`.
pub fn target_matrix(at: MatRef<'_, f64>, c: MatRef<'_, f64>) -> Mat<f64> {
    c.transpose() * at.transpose()
}

pub(crate) fn check_dims(
    context: &'static str,
    m: MatRef<'_, f64>,
    rows: usize,
    cols: usize,
) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::dim(
            context,
            format!("{rows}x{cols}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}
