use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hsi-rpca", version, about = "Robust PCA target detection for hyperspectral cubes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic scenes and ground-truth masks.
    Simulate(SimulateArgs),
    /// Split a cube into background, target and residual.
    Decompose(DecomposeArgs),
    /// Turn a target cube into a score map and a detection mask.
    Detect(DetectArgs),
    /// Score a detection mask against ground truth.
    Eval(EvalArgs),
    /// Evaluate detection over a grid of (tau, lambda) pairs.
    Sweep(SweepArgs),
    /// Rerun a command from its manifest.
    Replay(ReplayArgs),
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// TOML file with numeric parameters; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Single-threaded linear algebra and sequential sweeps, zero timestamps and runtimes.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverFlags {
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Initial ADMM penalty [default: 1e-4]
    #[arg(long)]
    pub rho0: Option<f64>,
    /// Penalty growth factor per ADMM iteration [default: 1.1]
    #[arg(long)]
    pub rho_growth: Option<f64>,
    /// Relative change threshold for the outer loop [default: 1e-4]
    #[arg(long)]
    pub outer_eps: Option<f64>,
    /// Consensus gap threshold for the inner loop [default: 1e-6]
    #[arg(long)]
    pub admm_tol: Option<f64>,
    /// Dual residual threshold for the inner loop; 0 disables it [default: 1e-6]
    #[arg(long)]
    pub admm_dual_tol: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub max_inner: Option<usize>,
    /// Keep the ADMM penalty and dual across outer iterations.
    #[arg(long)]
    pub persist_rho: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DictionaryArgs {
    /// Spectra CSV; every column except `wavelength_um` is an atom.
    #[arg(long)]
    pub dictionary: PathBuf,
    /// Comma-separated atom names to keep (default: all).
    #[arg(long, value_delimiter = ',')]
    pub atoms: Vec<String>,
    /// Scale each atom to unit norm.
    #[arg(long)]
    pub normalize: bool,
    /// 1-based inclusive band ranges to drop, e.g. `1-3,104-113`.
    #[arg(long)]
    pub remove_bands: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene description (TOML). Defaults to the built-in alpha sweep.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Overrides the scene's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub cube: PathBuf,
    #[command(flatten)]
    pub dict: DictionaryArgs,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Target component cube written by `decompose`.
    #[arg(long)]
    pub target: PathBuf,
    /// Pixels scoring above `floor * max score` are flagged [default: 1e-8]
    #[arg(long)]
    pub floor: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Score CSV; adds ROC area to the metrics.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// tau in sigma_1 * [0.01, 0.5], lambda in [0.1, 10] * median ||2 At^T d_i||.
    Heuristic,
    /// tau in sigma_1 * [1e-3, 1e-2], lambda in [1, 4] * the residual scale at each tau.
    Residual,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub cube: PathBuf,
    #[command(flatten)]
    pub dict: DictionaryArgs,
    /// Ground-truth mask.
    #[arg(long)]
    pub truth: PathBuf,
    /// Explicit tau values (requires --lambdas).
    #[arg(long, value_delimiter = ',', requires = "lambdas")]
    pub taus: Vec<f64>,
    /// Explicit lambda values (requires --taus).
    #[arg(long, value_delimiter = ',', requires = "taus")]
    pub lambdas: Vec<f64>,
    /// Grid derived from the data when no explicit values are given.
    #[arg(long, value_enum, default_value = "heuristic")]
    pub grid: GridKind,
    /// Grid shape as `TAUSxLAMBDAS`.
    #[arg(long, default_value = "5x5")]
    pub grid_size: String,
    #[arg(long)]
    pub floor: Option<f64>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
