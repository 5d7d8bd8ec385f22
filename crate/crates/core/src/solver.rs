//! Low-rank plus dictionary-sparse decomposition.
//!
//! Minimizes
//!
//! ```text
//! tau ||L||_* + lambda ||C||_{2,1} + ||D - L - (At C)^T||_F^2
//! ```
//!
//! over the `e x p` background `L` and the `Nt x e` coefficients `C` by
//! alternating two exact-in-principle block updates:
//!
//! * `L <- SVT(D - (At C)^T, tau / 2)`, closed form;
//! * `C <- argmin ||(D - L)^T - At C||_F^2 + lambda ||C||_{2,1}`, solved by
//!   scaled ADMM on the split `C = F` with a geometrically growing penalty.

use std::io::Write;

use faer::{Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dims, column_norms, ensure_finite, frobenius, frobenius_diff, is_finite, target_matrix};
use crate::prox::{shrink_with_spectrum, singular_value_shrink, thin_svd, DEFAULT_RANK_TOL};

/// Relative floor on column norms below which a coefficient column is inactive.
pub const ACTIVE_COLUMN_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Nuclear-norm weight.
    pub tau: f64,
    /// Group-sparsity weight.
    pub lambda: f64,
    pub rho0: f64,
    pub rho_growth: f64,
    /// Inner stop: `||C - F||_F^2 <= admm_tol`.
    pub admm_tol: f64,
    /// When set, the inner stop also requires the dual residual
    /// `rho^2 ||F_k - F_{k-1}||_F^2 <= admm_dual_tol`. Without it the consensus
    /// gap can close while `F` is still far from the subproblem minimizer.
    #[serde(default)]
    pub admm_dual_tol: Option<f64>,
    /// Outer stop: relative changes of `L` and `(At C)^T` both below this.
    pub outer_eps: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Start each inner solve from the previous `C` and `F`.
    pub warm_start_inner: bool,
    /// Carry `rho` and the scaled dual `Z` across outer iterations instead
    /// of restarting them at `rho0` and zero.
    pub persist_rho: bool,
}

impl SolverConfig {
    pub const DEFAULT_RHO0: f64 = 1e-4;
    pub const DEFAULT_RHO_GROWTH: f64 = 1.1;
    pub const DEFAULT_ADMM_TOL: f64 = 1e-6;
    pub const DEFAULT_ADMM_DUAL_TOL: f64 = 1e-6;
    pub const DEFAULT_OUTER_EPS: f64 = 1e-4;
    pub const DEFAULT_MAX_OUTER: usize = 100;
    pub const DEFAULT_MAX_INNER: usize = 500;

    pub fn new(tau: f64, lambda: f64) -> Self {
        Self {
            tau,
            lambda,
            rho0: Self::DEFAULT_RHO0,
            rho_growth: Self::DEFAULT_RHO_GROWTH,
            admm_tol: Self::DEFAULT_ADMM_TOL,
            admm_dual_tol: Some(Self::DEFAULT_ADMM_DUAL_TOL),
            outer_eps: Self::DEFAULT_OUTER_EPS,
            max_outer: Self::DEFAULT_MAX_OUTER,
            max_inner: Self::DEFAULT_MAX_INNER,
            warm_start_inner: true,
            persist_rho: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("lambda", self.lambda),
            ("rho0", self.rho0),
            ("admm_tol", self.admm_tol),
            ("outer_eps", self.outer_eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if let Some(tol) = self.admm_dual_tol {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(Error::InvalidArgument(format!("admm_dual_tol must be positive and finite, got {tol}")));
            }
        }
        if !(self.rho_growth > 1.0) || !self.rho_growth.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "rho_growth must be finite and > 1, got {}",
                self.rho_growth
            )));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidArgument("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

/// One outer iteration of [`solve`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub rank_l: usize,
    pub active_columns: usize,
    pub rel_change_l: f64,
    pub rel_change_t: f64,
    pub inner_iters: usize,
    pub consensus_gap: f64,
    /// False when the inner solve stopped at `max_inner`.
    pub inner_converged: bool,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    /// `e x p` low-rank background.
    pub l: Mat<f64>,
    /// `Nt x e` coefficients (exactly column-sparse).
    pub c: Mat<f64>,
    /// `e x p` sparse target matrix `(At C)^T`.
    pub target: Mat<f64>,
    /// `D - L - (At C)^T`.
    pub residual: Mat<f64>,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    pub outer_iters: usize,
}

impl DecompositionResult {
    /// Indices of pixels whose coefficient column is active.
    pub fn active_pixels(&self) -> Vec<usize> {
        active_column_mask(self.c.as_ref(), ACTIVE_COLUMN_FLOOR)
            .into_iter()
            .enumerate()
            .filter_map(|(i, a)| a.then_some(i))
            .collect()
    }
}

/// `||C||_{2,1}`, the sum of column norms.
pub fn l21_norm(c: MatRef<'_, f64>) -> f64 {
    column_norms(c).iter().sum()
}

/// Columns whose norm exceeds `rel_floor` times the largest column norm.
pub fn active_column_mask(c: MatRef<'_, f64>, rel_floor: f64) -> Vec<bool> {
    let norms = column_norms(c);
    let max = norms.iter().copied().fold(0.0, f64::max);
    norms.iter().map(|&n| max > 0.0 && n > rel_floor * max).collect()
}

pub fn active_column_count(c: MatRef<'_, f64>, rel_floor: f64) -> usize {
    active_column_mask(c, rel_floor).into_iter().filter(|&a| a).count()
}

fn check_problem(d: MatRef<'_, f64>, at: MatRef<'_, f64>) -> Result<()> {
    if at.ncols() == 0 {
        return Err(Error::InvalidArgument("dictionary has no columns".into()));
    }
    if d.ncols() != at.nrows() {
        return Err(Error::dim(
            "band count (scene vs dictionary)",
            format!("{} bands", d.ncols()),
            format!("{} bands", at.nrows()),
        ));
    }
    Ok(())
}

/// `tau ||L||_* + lambda ||C||_{2,1} + ||D - L - (At C)^T||_F^2`.
pub fn objective(
    d: MatRef<'_, f64>,
    l: MatRef<'_, f64>,
    c: MatRef<'_, f64>,
    at: MatRef<'_, f64>,
    tau: f64,
    lambda: f64,
) -> Result<f64> {
    check_problem(d, at)?;
    check_dims("objective L", l, d.nrows(), d.ncols())?;
    check_dims("objective C", c, at.ncols(), d.nrows())?;
    let nuclear = crate::linalg::nuclear_norm(l)?;
    Ok(objective_with_nuclear(d, l, c, at, tau, lambda, nuclear))
}

fn objective_with_nuclear(
    d: MatRef<'_, f64>,
    l: MatRef<'_, f64>,
    c: MatRef<'_, f64>,
    at: MatRef<'_, f64>,
    tau: f64,
    lambda: f64,
    nuclear: f64,
) -> f64 {
    let t = target_matrix(at, c);
    let fit = residual(d, l, t.as_ref()).norm_l2();
    tau * nuclear + lambda * l21_norm(c) + fit * fit
}

fn residual(d: MatRef<'_, f64>, l: MatRef<'_, f64>, t: MatRef<'_, f64>) -> Mat<f64> {
    Mat::from_fn(d.nrows(), d.ncols(), |i, j| d[(i, j)] - (l[(i, j)] + t[(i, j)]))
}

/// `tau rank(L) + lambda ||C||_{2,0}`. Diagnostic only.
///
/// Rank counts singular values above the default relative cutoff; a column
/// of `C` counts when its norm exceeds `zero_tol` times the largest column norm.
pub fn nonconvex_diagnostic(
    l: MatRef<'_, f64>,
    c: MatRef<'_, f64>,
    tau: f64,
    lambda: f64,
    zero_tol: f64,
) -> Result<f64> {
    let rank = thin_svd(l, DEFAULT_RANK_TOL)?.rank();
    let active = active_column_count(c, zero_tol);
    Ok(tau * rank as f64 + lambda * active as f64)
}

/// Closed-form background update `SVT(D - (At C)^T, tau / 2)`.
pub fn update_l(d: MatRef<'_, f64>, at: MatRef<'_, f64>, c: MatRef<'_, f64>, tau: f64) -> Result<Mat<f64>> {
    check_problem(d, at)?;
    check_dims("coefficients", c, at.ncols(), d.nrows())?;
    let t = target_matrix(at, c);
    singular_value_shrink((d - &t).as_ref(), tau / 2.0)
}

/// ADMM iterate. `rho` is the penalty the next iteration will use.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub c: Mat<f64>,
    pub f: Mat<f64>,
    pub z: Mat<f64>,
    pub rho: f64,
}

impl AdmmState {
    pub fn zeros(atoms: usize, pixels: usize, rho: f64) -> Self {
        Self {
            c: Mat::zeros(atoms, pixels),
            f: Mat::zeros(atoms, pixels),
            z: Mat::zeros(atoms, pixels),
            rho,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    /// The group-sparse iterate `F`, returned as the coefficient estimate.
    pub coefficients: Mat<f64>,
    pub inner_iters: usize,
    /// `||C - F||_F^2` at exit.
    pub consensus_gap: f64,
    pub converged: bool,
    /// Full final iterate, for warm starts.
    pub state: AdmmState,
}

/// `(2 At^T At + rho I)^{-1}` applied through one eigendecomposition of `At^T At`.
#[derive(Debug, Clone)]
pub struct CoefficientSystem {
    at: Mat<f64>,
    basis: Mat<f64>,
    eigenvalues: Vec<f64>,
}

impl CoefficientSystem {
    pub fn new(at: MatRef<'_, f64>) -> Result<Self> {
        ensure_finite(at, "dictionary")?;
        let gram = at.transpose() * at;
        let evd = gram
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Backend(format!("eigendecomposition: {e:?}")))?;
        let s = evd.S().column_vector();
        Ok(Self {
            at: at.to_owned(),
            basis: evd.U().to_owned(),
            // the Gram matrix is PSD; clamp roundoff negatives
            eigenvalues: (0..s.nrows()).map(|i| s[i].max(0.0)).collect(),
        })
    }

    pub fn atoms(&self) -> usize {
        self.at.ncols()
    }

    /// Solves `(2 At^T At + rho I) X = rhs`.
    pub fn solve(&self, rhs: MatRef<'_, f64>, rho: f64) -> Mat<f64> {
        let mut y = self.basis.transpose() * rhs;
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let inv = 1.0 / (2.0 * lam + rho);
            for j in 0..y.ncols() {
                y[(k, j)] *= inv;
            }
        }
        &self.basis * y
    }

    /// `2 At^T R` for `R = (D - L)^T`, computed from `D - L` directly.
    fn data_term_from_rows(&self, dl: MatRef<'_, f64>) -> Mat<f64> {
        let prod = dl * &self.at;
        Mat::from_fn(prod.ncols(), prod.nrows(), |i, j| 2.0 * prod[(j, i)])
    }

    /// Scaled ADMM for `min ||R - At C||_F^2 + lambda ||C||_{2,1}` given
    /// `data_term = 2 At^T R`.
    pub fn admm(
        &self,
        data_term: MatRef<'_, f64>,
        lambda: f64,
        cfg: &SolverConfig,
        start: AdmmState,
    ) -> Result<AdmmOutcome> {
        let AdmmState { mut c, mut f, mut z, mut rho } = start;
        let (atoms, pixels) = (data_term.nrows(), data_term.ncols());
        // one fused pass per pixel over contiguous columns; the Nt x Nt
        // eigenbasis is applied by hand since Nt is small
        let data = data_term.to_owned();
        let basis: Vec<f64> = (0..atoms).flat_map(|k| (0..atoms).map(move |i| (i, k))).map(|(i, k)| self.basis[(i, k)]).collect();
        let mut f_prev = Mat::<f64>::zeros(atoms, pixels);
        let (mut rhs, mut y, mut inv) = (vec![0.0; atoms], vec![0.0; atoms], vec![0.0; atoms]);
        let mut gap = f64::INFINITY;
        let mut iters = 0;
        let mut converged = false;
        while iters < cfg.max_inner {
            iters += 1;
            for (w, &lam) in inv.iter_mut().zip(&self.eigenvalues) {
                *w = 1.0 / (2.0 * lam + rho);
            }
            let kappa = lambda / rho;
            gap = 0.0;
            let mut moved = 0.0;
            let mut finite = true;
            for j in 0..pixels {
                let dj = data.col_as_slice(j);
                let cj = c.col_as_slice_mut(j);
                let fj = f.col_as_slice_mut(j);
                let zj = z.col_as_slice_mut(j);
                let pj = f_prev.col_as_slice_mut(j);
                for i in 0..atoms {
                    rhs[i] = rho * fj[i] - zj[i] + dj[i];
                }
                for (k, yk) in y.iter_mut().enumerate() {
                    let bk = &basis[k * atoms..(k + 1) * atoms];
                    *yk = inv[k] * bk.iter().zip(&rhs).map(|(b, r)| b * r).sum::<f64>();
                }
                for (i, ci) in cj.iter_mut().enumerate() {
                    *ci = (0..atoms).map(|k| basis[k * atoms + i] * y[k]).sum();
                }
                pj.copy_from_slice(fj);
                let mut norm2 = 0.0;
                for i in 0..atoms {
                    let v = cj[i] + zj[i] / rho;
                    fj[i] = v;
                    norm2 += v * v;
                }
                let norm = norm2.sqrt();
                let scale = if norm > kappa { (norm - kappa) / norm } else { 0.0 };
                for i in 0..atoms {
                    fj[i] *= scale;
                    let r = cj[i] - fj[i];
                    zj[i] += rho * r;
                    gap += r * r;
                    let s = fj[i] - pj[i];
                    moved += s * s;
                    finite &= zj[i].is_finite();
                }
            }
            let dual = rho * rho * moved;
            rho *= cfg.rho_growth;
            if !finite || !gap.is_finite() || !dual.is_finite() {
                return Err(Error::Diverged {
                    stage: "admm",
                    iteration: iters,
                });
            }
            if gap <= cfg.admm_tol && !matches!(cfg.admm_dual_tol, Some(tol) if dual > tol) {
                converged = true;
                break;
            }
        }
        Ok(AdmmOutcome {
            coefficients: f.clone(),
            inner_iters: iters,
            consensus_gap: gap,
            converged,
            state: AdmmState { c, f, z, rho },
        })
    }
}

/// Coefficient update for `R = (D - L)^T` (`p x e`), by ADMM.
///
/// Starts from `warm` when given, otherwise from zeros with `rho = rho0`.
pub fn admm_solve_c(
    r: MatRef<'_, f64>,
    at: MatRef<'_, f64>,
    lambda: f64,
    cfg: &SolverConfig,
    warm: Option<AdmmState>,
) -> Result<AdmmOutcome> {
    if r.nrows() != at.nrows() {
        return Err(Error::dim("residual bands", at.nrows(), r.nrows()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    ensure_finite(r, "residual")?;
    let sys = CoefficientSystem::new(at)?;
    let start = match warm {
        Some(s) => {
            check_dims("warm start C", s.c.as_ref(), at.ncols(), r.ncols())?;
            check_dims("warm start F", s.f.as_ref(), at.ncols(), r.ncols())?;
            check_dims("warm start Z", s.z.as_ref(), at.ncols(), r.ncols())?;
            s
        }
        None => AdmmState::zeros(at.ncols(), r.ncols(), cfg.rho0),
    };
    let atr = at.transpose() * r;
    let data_term = Mat::<f64>::from_fn(atr.nrows(), atr.ncols(), |i, j| 2.0 * atr[(i, j)]);
    sys.admm(data_term.as_ref(), lambda, cfg, start)
}

/// Runs the alternating minimization from `L = C = F = Z = 0`.
pub fn solve(d: MatRef<'_, f64>, at: MatRef<'_, f64>, cfg: &SolverConfig) -> Result<DecompositionResult> {
    cfg.validate()?;
    check_problem(d, at)?;
    ensure_finite(d, "scene matrix")?;
    ensure_finite(at, "dictionary")?;

    let (e, p) = (d.nrows(), d.ncols());
    let atoms = at.ncols();
    let sys = CoefficientSystem::new(at)?;
    let d_norm = frobenius(d);
    let denom = if d_norm > 0.0 { d_norm } else { 1.0 };

    let mut l = Mat::<f64>::zeros(e, p);
    let mut c = Mat::<f64>::zeros(atoms, e);
    let mut t = Mat::<f64>::zeros(e, p);
    let mut state = AdmmState::zeros(atoms, e, cfg.rho0);
    let mut trace = Vec::new();
    let mut converged = false;

    for k in 1..=cfg.max_outer {
        let (l_new, spectrum) = shrink_with_spectrum((d - &t).as_ref(), cfg.tau / 2.0)?;
        if !is_finite(l_new.as_ref()) {
            return Err(Error::Diverged { stage: "svt", iteration: k });
        }
        let nuclear: f64 = spectrum.iter().sum();

        let start = if cfg.persist_rho {
            state
        } else if cfg.warm_start_inner {
            AdmmState {
                c: state.c,
                f: state.f,
                z: Mat::zeros(atoms, e),
                rho: cfg.rho0,
            }
        } else {
            AdmmState::zeros(atoms, e, cfg.rho0)
        };
        let data_term = sys.data_term_from_rows((d - &l_new).as_ref());
        let outcome = sys.admm(data_term.as_ref(), cfg.lambda, cfg, start)?;

        let c_new = outcome.coefficients;
        let t_new = target_matrix(at, c_new.as_ref());
        let rel_l = frobenius_diff(l_new.as_ref(), l.as_ref()) / denom;
        let rel_t = frobenius_diff(t_new.as_ref(), t.as_ref()) / denom;
        let obj = objective_with_nuclear(d, l_new.as_ref(), c_new.as_ref(), at, cfg.tau, cfg.lambda, nuclear);

        trace.push(TraceRecord {
            iteration: k,
            objective: obj,
            rank_l: spectrum.len(),
            active_columns: active_column_count(c_new.as_ref(), ACTIVE_COLUMN_FLOOR),
            rel_change_l: rel_l,
            rel_change_t: rel_t,
            inner_iters: outcome.inner_iters,
            consensus_gap: outcome.consensus_gap,
            inner_converged: outcome.converged,
        });

        l = l_new;
        c = c_new;
        t = t_new;
        state = outcome.state;

        if rel_l <= cfg.outer_eps && rel_t <= cfg.outer_eps {
            converged = true;
            break;
        }
    }

    let residual = residual(d, l.as_ref(), t.as_ref());
    Ok(DecompositionResult {
        outer_iters: trace.len(),
        l,
        c,
        target: t,
        residual,
        trace,
        converged,
    })
}

/// Seed grids for a parameter sweep: `tau` spans `sigma_1(D) * [0.01, 0.5]`
/// and `lambda` spans `[0.1, 10]` times the median column norm of `2 At^T D^T`,
/// both geometrically spaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub taus: Vec<f64>,
    pub lambdas: Vec<f64>,
}

pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![(lo * hi).sqrt()],
        _ => (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Median column norm of `2 At^T D^T`, the natural scale of `lambda`.
pub fn lambda_scale(d: MatRef<'_, f64>, at: MatRef<'_, f64>) -> Result<f64> {
    check_problem(d, at)?;
    let g = at.transpose() * d.transpose();
    let mut norms: Vec<f64> = column_norms(g.as_ref()).into_iter().map(|n| 2.0 * n).collect();
    if norms.is_empty() {
        return Ok(0.0);
    }
    norms.sort_by(f64::total_cmp);
    let n = norms.len();
    Ok(if n % 2 == 1 {
        norms[n / 2]
    } else {
        0.5 * (norms[n / 2 - 1] + norms[n / 2])
    })
}

pub fn heuristic_grid(d: MatRef<'_, f64>, at: MatRef<'_, f64>, n_tau: usize, n_lambda: usize) -> Result<ParameterGrid> {
    let sigma1 = crate::linalg::spectral_norm(d)?;
    let scale = lambda_scale(d, at)?;
    if sigma1 == 0.0 || scale == 0.0 {
        return Err(Error::InvalidArgument(
            "cannot derive a parameter grid from an all-zero scene".into(),
        ));
    }
    Ok(ParameterGrid {
        taus: geomspace(0.01 * sigma1, 0.5 * sigma1, n_tau),
        lambdas: geomspace(0.1 * scale, 10.0 * scale, n_lambda),
    })
}

impl ParameterGrid {
    /// Every `(tau, lambda)` combination, tau-major.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.taus.iter().flat_map(|&t| self.lambdas.iter().map(move |&l| (t, l))).collect()
    }
}

/// Median column norm of `2 At^T (D - SVT(D, tau/2))^T`: the size of the
/// coefficient gradient left over once the background has taken its share.
///
/// When the target spectrum lies close to the background span, most of
/// `At^T D^T` is background energy and `lambda_scale` overshoots. This scale
/// tracks what the first ADMM pass actually sees.
pub fn residual_lambda_scale(d: MatRef<'_, f64>, at: MatRef<'_, f64>, tau: f64) -> Result<f64> {
    check_problem(d, at)?;
    let l = singular_value_shrink(d, tau / 2.0)?;
    let r = d - &l;
    lambda_scale(r.as_ref(), at)
}

/// Grid with small `tau` values and `lambda` tied to the residual scale at
/// each `tau`. Returns `(tau, lambda)` pairs, tau-major.
///
/// `tau` spans `sigma_1 * [1e-3, 1e-2]`, lambda spans `[1, 4]` times
/// [`residual_lambda_scale`].
pub fn residual_grid(d: MatRef<'_, f64>, at: MatRef<'_, f64>, n_tau: usize, n_lambda: usize) -> Result<Vec<(f64, f64)>> {
    let sigma1 = crate::linalg::spectral_norm(d)?;
    if sigma1 == 0.0 {
        return Err(Error::InvalidArgument(
            "cannot derive a parameter grid from an all-zero scene".into(),
        ));
    }
    let mut points = Vec::with_capacity(n_tau * n_lambda);
    for tau in geomspace(1e-3 * sigma1, 1e-2 * sigma1, n_tau) {
        let scale = residual_lambda_scale(d, at, tau)?;
        if scale == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "residual is orthogonal to the dictionary at tau = {tau:e}"
            )));
        }
        points.extend(geomspace(scale, 4.0 * scale, n_lambda).into_iter().map(|l| (tau, l)));
    }
    Ok(points)
}

pub const TRACE_CSV_HEADER: &str =
    "iteration,objective,rank_l,active_columns,rel_change_l,rel_change_t,inner_iters,consensus_gap,inner_converged";

/// Writes the outer-iteration trace as CSV.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TraceRecord]) -> std::io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.iteration,
            r.objective,
            r.rank_l,
            r.active_columns,
            r.rel_change_l,
            r.rel_change_t,
            r.inner_iters,
            r.consensus_gap,
            r.inner_converged
        )?;
    }
    Ok(())
}
