use std::path::{Path, PathBuf};

use hsi_rpca::{SceneSpec, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::args::GridKind;
use crate::CliError;

pub const MANIFEST_SUFFIX: &str = "_manifest.json";

/// How the target dictionary is assembled from a spectra file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionarySource {
    pub path: PathBuf,
    /// Empty means every spectrum in the file.
    pub atoms: Vec<String>,
    pub normalize: bool,
    pub remove_bands: Option<String>,
}

/// A fully resolved command: paths are absolute and config-file values are
/// folded in, so replaying it needs nothing but this record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Invocation {
    Simulate {
        spec: SceneSpec,
        /// Directory that relative paths inside `spec` resolve against.
        base_dir: PathBuf,
    },
    Decompose {
        cube: PathBuf,
        dictionary: DictionarySource,
        solver: SolverConfig,
    },
    Detect {
        target: PathBuf,
        floor: f64,
    },
    Eval {
        mask: PathBuf,
        truth: PathBuf,
        scores: Option<PathBuf>,
    },
    Sweep {
        cube: PathBuf,
        dictionary: DictionarySource,
        truth: PathBuf,
        /// Set when the points were derived from the data.
        grid: Option<GridKind>,
        points: Vec<(f64, f64)>,
        floor: f64,
        /// Shared settings; `tau` and `lambda` are taken from `points`.
        solver: SolverConfig,
    },
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::Simulate { .. } => "simulate",
            Invocation::Decompose { .. } => "decompose",
            Invocation::Detect { .. } => "detect",
            Invocation::Eval { .. } => "eval",
            Invocation::Sweep { .. } => "sweep",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Invocation::Simulate { spec, .. } => Some(spec.seed),
            _ => None,
        }
    }

    pub fn solver(&self) -> Option<&SolverConfig> {
        match self {
            Invocation::Decompose { solver, .. } | Invocation::Sweep { solver, .. } => Some(solver),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub invocation: Invocation,
    /// Copy of the solver settings for quick inspection; replay reads `invocation`.
    pub solver: Option<SolverConfig>,
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub out_dir: PathBuf,
    /// File names relative to `out_dir`.
    pub outputs: Vec<String>,
    /// False when the solver hit an iteration cap.
    pub converged: bool,
    /// Seconds since the epoch; `SOURCE_DATE_EPOCH` when set, 0 in deterministic mode.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn path_in(out_dir: &Path, command: &str) -> PathBuf {
        out_dir.join(format!("{command}{MANIFEST_SUFFIX}"))
    }

    pub fn write(&self) -> Result<PathBuf, CliError> {
        let path = Self::path_in(&self.out_dir, self.invocation.name());
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("malformed manifest {}: {e}", path.display())))
    }
}

pub fn timestamp(deterministic: bool) -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    if deterministic {
        return 0;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}
