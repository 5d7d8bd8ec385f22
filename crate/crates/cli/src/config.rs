//! Config file handling. Every numeric flag has a key of the same name
//! (with underscores); values given on the command line win.

use std::path::Path;

use hsi_rpca::SolverConfig;
use serde::Deserialize;

use crate::args::SolverFlags;
use crate::CliError;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub tau: Option<f64>,
    pub lambda: Option<f64>,
    pub rho0: Option<f64>,
    pub rho_growth: Option<f64>,
    pub outer_eps: Option<f64>,
    pub admm_tol: Option<f64>,
    pub admm_dual_tol: Option<f64>,
    pub max_outer: Option<usize>,
    pub max_inner: Option<usize>,
    pub persist_rho: Option<bool>,
    pub seed: Option<u64>,
    pub floor: Option<f64>,
    pub deterministic: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {}", path.display(), e.message())))
    }
}

/// Flags over file over defaults. `tau` and `lambda` have no defaults unless
/// `need_weights` is false, in which case placeholders are used.
pub fn resolve_solver(flags: &SolverFlags, file: &FileConfig, need_weights: bool) -> Result<SolverConfig, CliError> {
    let tau = flags.tau.or(file.tau);
    let lambda = flags.lambda.or(file.lambda);
    let (tau, lambda) = match (tau, lambda) {
        (Some(t), Some(l)) => (t, l),
        _ if !need_weights => (1.0, 1.0),
        (None, _) => return Err(CliError::Usage("--tau is required (flag or config key `tau`)".into())),
        (_, None) => return Err(CliError::Usage("--lambda is required (flag or config key `lambda`)".into())),
    };
    let mut cfg = SolverConfig::new(tau, lambda);
    if let Some(v) = flags.rho0.or(file.rho0) {
        cfg.rho0 = v;
    }
    if let Some(v) = flags.rho_growth.or(file.rho_growth) {
        cfg.rho_growth = v;
    }
    if let Some(v) = flags.outer_eps.or(file.outer_eps) {
        cfg.outer_eps = v;
    }
    if let Some(v) = flags.admm_tol.or(file.admm_tol) {
        cfg.admm_tol = v;
    }
    if let Some(v) = flags.admm_dual_tol.or(file.admm_dual_tol) {
        cfg.admm_dual_tol = (v != 0.0).then_some(v);
    }
    if let Some(v) = flags.max_outer.or(file.max_outer) {
        cfg.max_outer = v;
    }
    if let Some(v) = flags.max_inner.or(file.max_inner) {
        cfg.max_inner = v;
    }
    cfg.persist_rho = flags.persist_rho || file.persist_rho.unwrap_or(false);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}
