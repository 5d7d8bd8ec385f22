//! Dictionary-constrained robust PCA for hyperspectral target detection.
//!
//! A scene is flattened to an `e x p` matrix `D` (pixels by bands) and split as
//! `D = L + (At C)^T + N`: a low-rank background `L`, a target component whose
//! rows lie in the span of a known target dictionary `At` with column-sparse
//! coefficients `C`, and a residual. Pixels with a nonzero coefficient column
//! are the detections.
//!
//! Module map:
//!
//! * [`cube`]: cube container, flattening, band masks
//! * [`io`]: cube, mask and score-map file formats
//! * [`prox`]: singular value shrinkage and group soft-thresholding
//! * [`solver`]: the alternating SVT / ADMM minimization
//! * [`dictionary`]: target dictionaries from spectra CSV files
//! * [`scene`]: synthetic backgrounds and target implantation
//! * [`detect`]: scores, masks, and detection metrics

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cube;
pub mod detect;
pub mod dictionary;
pub mod error;
pub mod io;
pub mod linalg;
pub mod prox;
pub mod scene;
pub mod solver;

pub use faer;

pub use cube::{flatten, remove_bands, unflatten, BandMask, FlatMatrix, HsiCube};
pub use detect::{binarize, detection_scores, evaluate, roc_points, BinaryMask, DetectionReport, RocPoint, ScoreMap};
pub use dictionary::{build_dictionary, load_spectra, write_spectra, SpectrumRecord, TargetDictionary};
pub use error::{Error, Result};
pub use prox::{
    group_soft_threshold, group_threshold_optimality_gap, singular_value_shrink, svt_optimality_gap, thin_svd,
    ThinSvd,
};
pub use scene::{alpha_sweep_protocol, implant, BlockSpec, GroundTruth, ImplantPlan, SceneSet, SceneSpec};
pub use solver::{
    admm_solve_c, heuristic_grid, residual_grid, nonconvex_diagnostic, objective, solve, update_l, DecompositionResult,
    SolverConfig, TraceRecord,
};
