//! Reference computations for tests.
//!
//! Everything here works on plain `Vec<Vec<f64>>` with hand-written routines
//! (cyclic Jacobi, bisection, FISTA) so that expected values never pass
//! through the library's SVD, shrinkage, or ADMM code.

#![allow(dead_code)]

use hsi_rpca::faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_dense(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Dense {
    (0..rows).map(|_| (0..cols).map(|_| gaussian(rng)).collect()).collect()
}

pub fn to_mat(d: &Dense) -> Mat<f64> {
    let cols = d.first().map_or(0, Vec::len);
    Mat::from_fn(d.len(), cols, |i, j| d[i][j])
}

pub fn from_mat(m: &Mat<f64>) -> Dense {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn frob(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frob_diff_mat(a: &Mat<f64>, b: &Dense) -> f64 {
    let mut acc = 0.0;
    for (i, row) in b.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            acc += (a[(i, j)] - v).powi(2);
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns eigenvalues and eigenvectors as columns of `V`.
pub fn jacobi_eigen(sym: &Dense) -> (Vec<f64>, Dense) {
    let n = sym.len();
    let mut a = sym.clone();
    let mut v: Dense = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Singular values via the eigenvalues of `M^T M`, descending.
pub fn singular_values_oracle(m: &Dense) -> Vec<f64> {
    let gram = matmul(&transpose(m), m);
    let (mut ev, _) = jacobi_eigen(&gram);
    ev.iter_mut().for_each(|e| *e = e.max(0.0).sqrt());
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn nuclear_norm_oracle(m: &Dense) -> f64 {
    singular_values_oracle(m).iter().sum()
}

/// `argmin_L ||L - M||_F^2 + 2 theta ||L||_*` by a spectral route independent of
/// any SVD code: with `M^T M = V diag(s^2) V^T`, the minimizer is
/// `M V diag(max(1 - theta / s, 0)) V^T`.
pub fn svt_oracle(m: &Dense, theta: f64) -> Dense {
    let gram = matmul(&transpose(m), m);
    let (ev, v) = jacobi_eigen(&gram);
    let n = ev.len();
    let smax = ev.iter().cloned().fold(0.0f64, f64::max).sqrt();
    let weights: Vec<f64> = ev
        .iter()
        .map(|&e| {
            let s = e.max(0.0).sqrt();
            if s <= 1e-14 * smax.max(1e-300) {
                0.0
            } else {
                (1.0 - theta / s).max(0.0)
            }
        })
        .collect();
    // P = V diag(w) V^T
    let p: Dense = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| v[i][k] * weights[k] * v[j][k]).sum()).collect())
        .collect();
    matmul(m, &p)
}

/// `min_c ||r - a c||^2 + lambda |c|` for a scalar `c`, by bisection on the
/// subgradient of the convex objective.
pub fn scalar_group_lasso_bisection(r: &[f64], a: &[f64], lambda: f64) -> f64 {
    let ar: f64 = r.iter().zip(a).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    // derivative of the smooth part at c: 2 aa c - 2 ar
    if (2.0 * ar).abs() <= lambda {
        return 0.0;
    }
    let sign = ar.signum();
    // on the side c * sign > 0: g(c) = 2 aa c - 2 ar + lambda sign, increasing in c
    let g = |c: f64| 2.0 * aa * c - 2.0 * ar + lambda * sign;
    let (mut lo, mut hi) = if sign > 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) };
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    while g(lo) > 0.0 {
        lo *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `min_C ||R - A C||_F^2 + lambda ||C||_{2,1}` by FISTA with a hand-written
/// column shrink. `r` is `p x e`, `a` is `p x k`; returns `k x e`.
pub fn group_lasso_fista(r: &Dense, a: &Dense, lambda: f64, iters: usize) -> Dense {
    let at = transpose(a);
    let gram = matmul(&at, a);
    let atr = matmul(&at, r);
    let (ev, _) = jacobi_eigen(&gram);
    let lip = 2.0 * ev.iter().cloned().fold(0.0f64, f64::max);
    let step = 1.0 / lip;
    let k = a[0].len();
    let e = r[0].len();
    let mut x = vec![vec![0.0; e]; k];
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        // gradient of ||R - A Y||^2 is 2 (A^T A Y - A^T R)
        let gy = matmul(&gram, &y);
        let mut z = y.clone();
        for i in 0..k {
            for j in 0..e {
                z[i][j] -= step * 2.0 * (gy[i][j] - atr[i][j]);
            }
        }
        let mut x_new = z.clone();
        for j in 0..e {
            let norm: f64 = (0..k).map(|i| z[i][j] * z[i][j]).sum::<f64>().sqrt();
            let s = if norm > step * lambda { 1.0 - step * lambda / norm } else { 0.0 };
            for i in 0..k {
                x_new[i][j] = s * z[i][j];
            }
        }
        let t_new = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let mom = (t - 1.0) / t_new;
        for i in 0..k {
            for j in 0..e {
                y[i][j] = x_new[i][j] + mom * (x_new[i][j] - x[i][j]);
            }
        }
        x = x_new;
        t = t_new;
    }
    x
}

/// `||R - A C||_F^2 + lambda ||C||_{2,1}` from raw definitions.
pub fn group_lasso_objective(r: &Dense, a: &Dense, c: &Dense, lambda: f64) -> f64 {
    let fit = frob(&sub(r, &matmul(a, c))).powi(2);
    let l21: f64 = (0..c[0].len()).map(|j| c.iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt()).sum();
    fit + lambda * l21
}

/// `tau ||L||_* + lambda ||C||_{2,1} + ||D - L - (A C)^T||_F^2` from raw definitions.
pub fn full_objective_oracle(d: &Dense, l: &Dense, c: &Dense, a: &Dense, tau: f64, lambda: f64) -> f64 {
    let target = transpose(&matmul(a, c));
    let res = sub(&sub(d, l), &target);
    let l21: f64 = (0..c[0].len()).map(|j| c.iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt()).sum();
    tau * nuclear_norm_oracle(l) + lambda * l21 + frob(&res).powi(2)
}

/// A random problem instance: low-rank background, a few pixels carrying
/// dictionary content, and small dense noise. Returns `(D, At)` as `e x p` and `p x k`.
pub fn random_instance(e: usize, p: usize, k: usize, rank: usize, active: usize, noise: f64, seed: u64) -> (Mat<f64>, Mat<f64>) {
    let mut g = rng(seed);
    let u = random_dense(e, rank, &mut g);
    let v = random_dense(rank, p, &mut g);
    let mut d = matmul(&u, &v);
    let a = random_dense(p, k, &mut g);
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < active.min(e) {
        let i = g.gen_range(0..e);
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    for &i in &picked {
        let coef: Vec<f64> = (0..k).map(|_| 2.0 * gaussian(&mut g)).collect();
        for j in 0..p {
            d[i][j] += (0..k).map(|t| a[j][t] * coef[t]).sum::<f64>();
        }
    }
    for row in d.iter_mut() {
        for x in row.iter_mut() {
            *x += noise * gaussian(&mut g);
        }
    }
    (to_mat(&d), to_mat(&a))
}
