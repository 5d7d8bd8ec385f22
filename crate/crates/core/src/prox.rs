//! Shrinkage operators and their optimality checks.
//!
//! `singular_value_shrink(M, theta)` is the minimizer of
//! `||L - M||_F^2 + 2 theta ||L||_*`, and `group_soft_threshold(M, kappa)` the
//! minimizer of `||F - M||_F^2 / 2 + kappa ||F||_{2,1}` (columns as groups).
//! Each operator has a checker that measures how far a candidate is from
//! satisfying the stationarity condition of its problem.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, spectral_norm};

/// Default relative cutoff below which singular values count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Truncated SVD `m = U diag(s) V^T` keeping only the numerically nonzero part.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `rows x r`, orthonormal columns.
    pub u: Mat<f64>,
    /// `r` singular values, descending.
    pub s: Vec<f64>,
    /// `cols x r`, orthonormal columns.
    pub v: Mat<f64>,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U diag(weights) V^T`; `weights` must have length `rank()`.
    pub fn reconstruct_with(&self, weights: &[f64]) -> Mat<f64> {
        assert_eq!(weights.len(), self.rank());
        let rows = self.u.nrows();
        let cols = self.v.nrows();
        let kept: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] != 0.0).collect();
        if kept.is_empty() {
            return Mat::zeros(rows, cols);
        }
        let us = Mat::<f64>::from_fn(rows, kept.len(), |i, k| self.u[(i, kept[k])] * weights[kept[k]]);
        let vk = Mat::<f64>::from_fn(cols, kept.len(), |i, k| self.v[(i, kept[k])]);
        &us * vk.transpose()
    }

    pub fn reconstruct(&self) -> Mat<f64> {
        self.reconstruct_with(&self.s)
    }
}

/// Thin SVD dropping singular values below `rank_tol * s_max`.
pub fn thin_svd(m: MatRef<'_, f64>, rank_tol: f64) -> Result<ThinSvd> {
    ensure_finite(m, "svd input")?;
    let (rows, cols) = (m.nrows(), m.ncols());
    if rows == 0 || cols == 0 {
        return Ok(ThinSvd {
            u: Mat::zeros(rows, 0),
            s: Vec::new(),
            v: Mat::zeros(cols, 0),
        });
    }
    let svd = m.thin_svd().map_err(|e| Error::Backend(format!("svd: {e:?}")))?;
    let sv = svd.S().column_vector();
    let smax = sv[0];
    let r = if smax > 0.0 {
        (0..sv.nrows()).take_while(|&i| sv[i] > rank_tol * smax).count()
    } else {
        0
    };
    Ok(ThinSvd {
        u: svd.U().subcols(0, r).to_owned(),
        s: (0..r).map(|i| sv[i]).collect(),
        v: svd.V().subcols(0, r).to_owned(),
    })
}

/// Singular value shrinkage, also returning the shrunk singular values
/// (whose sum is the nuclear norm of the output).
pub(crate) fn shrink_with_spectrum(m: MatRef<'_, f64>, theta: f64) -> Result<(Mat<f64>, Vec<f64>)> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "shrinkage threshold must be finite and nonnegative, got {theta}"
        )));
    }
    let svd = thin_svd(m, DEFAULT_RANK_TOL)?;
    let shrunk: Vec<f64> = svd
        .s
        .iter()
        .map(|&s| (s - theta).max(0.0))
        .take_while(|&s| s > 0.0)
        .collect();
    let mut weights = shrunk.clone();
    weights.resize(svd.rank(), 0.0);
    Ok((svd.reconstruct_with(&weights), shrunk))
}

/// `U diag(max(s_i - theta, 0)) V^T`, the proximal map of `theta ||.||_*`
/// under the `||.||_F^2 / 2` metric.
pub fn singular_value_shrink(m: MatRef<'_, f64>, theta: f64) -> Result<Mat<f64>> {
    shrink_with_spectrum(m, theta).map(|(l, _)| l)
}

/// Violation of `m - l = theta * G` with `G` a subgradient of the nuclear norm at `l`.
///
/// With `G = (m - l) / theta` and `U0`, `V0` spanning the column and row spaces
/// of `l`, a minimizer satisfies `||G||_2 <= 1`, `U0^T (G - U0 V0^T) = 0` and
/// `(G - U0 V0^T) V0 = 0`. Returns the largest violation. For `theta = 0` the
/// minimizer is `m` itself and the gap is `||m - l||_F`.
pub fn svt_optimality_gap(m: MatRef<'_, f64>, theta: f64, l: MatRef<'_, f64>) -> Result<f64> {
    crate::linalg::check_dims("svt gap candidate", l, m.nrows(), m.ncols())?;
    if theta < 0.0 {
        return Err(Error::InvalidArgument(format!("negative threshold {theta}")));
    }
    if theta == 0.0 {
        return Ok(crate::linalg::frobenius_diff(m, l));
    }
    let g = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] - l[(i, j)]) / theta);
    let mut gap = (spectral_norm(g.as_ref())? - 1.0).max(0.0);

    let svd = thin_svd(l, DEFAULT_RANK_TOL)?;
    if svd.rank() > 0 {
        let w = &g - &svd.u * svd.v.transpose();
        let left = svd.u.transpose() * &w;
        let right = &w * &svd.v;
        gap = gap.max(left.norm_l2()).max(right.norm_l2());
    }
    Ok(gap)
}

/// Column-wise group soft-thresholding:
/// column `j` becomes `max(||m_j|| - kappa, 0) * m_j / ||m_j||`, zero columns stay zero.
pub fn group_soft_threshold(m: MatRef<'_, f64>, kappa: f64) -> Result<Mat<f64>> {
    if !(kappa >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "group threshold must be nonnegative, got {kappa}"
        )));
    }
    let mut out = Mat::<f64>::zeros(m.nrows(), m.ncols());
    group_soft_threshold_into(m, kappa, &mut out);
    Ok(out)
}

pub(crate) fn group_soft_threshold_into(m: MatRef<'_, f64>, kappa: f64, out: &mut Mat<f64>) {
    for j in 0..m.ncols() {
        let col = m.col(j);
        let norm = col.norm_l2();
        let scale = if norm > kappa { (norm - kappa) / norm } else { 0.0 };
        for i in 0..m.nrows() {
            out[(i, j)] = scale * col[i];
        }
    }
}

/// Per-column stationarity violation for a group soft-threshold candidate.
///
/// Nonzero columns must satisfy `m_j = f_j + kappa f_j / ||f_j||`; zero
/// columns must satisfy `||m_j|| <= kappa`.
pub fn group_threshold_optimality_gap(
    m: MatRef<'_, f64>,
    kappa: f64,
    f: MatRef<'_, f64>,
) -> Result<f64> {
    crate::linalg::check_dims("group threshold candidate", f, m.nrows(), m.ncols())?;
    if kappa < 0.0 {
        return Err(Error::InvalidArgument(format!("negative threshold {kappa}")));
    }
    let mut gap: f64 = 0.0;
    for j in 0..m.ncols() {
        let fnorm = f.col(j).norm_l2();
        if fnorm == 0.0 {
            gap = gap.max(m.col(j).norm_l2() - kappa);
        } else {
            let scale = 1.0 + kappa / fnorm;
            let mut acc = 0.0;
            for i in 0..m.nrows() {
                let d = m[(i, j)] - scale * f[(i, j)];
                acc += d * d;
            }
            gap = gap.max(acc.sqrt());
        }
    }
    Ok(gap.max(0.0))
}
