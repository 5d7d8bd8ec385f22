//! Detection on the sparse target component and scoring against ground truth.
//!
//! A pixel's score is the l2 norm of its row of `(At C)^T`, i.e. the energy the
//! decomposition assigned to the target subspace at that location. Pixels with
//! an all-zero coefficient column score exactly zero.

use faer::MatRef;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::GroundTruth;
use crate::solver::DecompositionResult;

/// Default relative floor for binarization, matching the solver's active-column floor.
pub const DEFAULT_FLOOR: f64 = crate::solver::ACTIVE_COLUMN_FLOOR;

/// Per-pixel nonnegative scores, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl ScoreMap {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// Row-major boolean map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub height: usize,
    pub width: usize,
    pub values: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, values: Vec<bool>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::dim("mask length", height * width, values.len()));
        }
        Ok(Self { height, width, values })
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }
}

impl From<&GroundTruth> for BinaryMask {
    fn from(gt: &GroundTruth) -> Self {
        Self {
            height: gt.height,
            width: gt.width,
            values: gt.mask.clone(),
        }
    }
}

/// Row norms of an `e x p` target matrix, reshaped to `height x width`.
pub fn scores_from_target(target: MatRef<'_, f64>, height: usize, width: usize) -> Result<ScoreMap> {
    if target.nrows() != height * width {
        return Err(Error::dim(
            "target rows",
            format!("{} ({height}x{width})", height * width),
            target.nrows(),
        ));
    }
    let mut values = vec![0.0; target.nrows()];
    for j in 0..target.ncols() {
        for (i, v) in values.iter_mut().enumerate() {
            let x = target[(i, j)];
            *v += x * x;
        }
    }
    values.iter_mut().for_each(|v| *v = v.sqrt());
    Ok(ScoreMap { height, width, values })
}

pub fn detection_scores(result: &DecompositionResult, height: usize, width: usize) -> Result<ScoreMap> {
    scores_from_target(result.target.as_ref(), height, width)
}

/// `scores > floor_rel * max(scores)`; an all-zero map yields an empty mask.
pub fn binarize(scores: &ScoreMap, floor_rel: f64) -> BinaryMask {
    let cut = floor_rel * scores.max();
    let any = scores.max() > 0.0;
    BinaryMask {
        height: scores.height,
        width: scores.width,
        values: scores.values.iter().map(|&s| any && s > cut).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    /// Flagged pixels inside the ground truth.
    pub detected: usize,
    /// Flagged pixels outside the ground truth.
    pub false_alarms: usize,
    pub flagged: usize,
    pub targets: usize,
    pub pixels: usize,
    /// `detected / targets` (0 when there are no targets).
    pub pd: f64,
    /// `false_alarms / (pixels - targets)`.
    pub false_alarm_rate: f64,
}

pub fn evaluate(mask: &BinaryMask, gt: &GroundTruth) -> Result<DetectionReport> {
    if (mask.height, mask.width) != (gt.height, gt.width) {
        return Err(Error::dim(
            "mask vs ground truth",
            format!("{}x{}", gt.height, gt.width),
            format!("{}x{}", mask.height, mask.width),
        ));
    }
    let (mut detected, mut false_alarms) = (0, 0);
    for (&m, &t) in mask.values.iter().zip(&gt.mask) {
        match (m, t) {
            (true, true) => detected += 1,
            (true, false) => false_alarms += 1,
            _ => {}
        }
    }
    let targets = gt.count();
    let pixels = gt.mask.len();
    let negatives = pixels - targets;
    Ok(DetectionReport {
        detected,
        false_alarms,
        flagged: detected + false_alarms,
        targets,
        pixels,
        pd: if targets > 0 { detected as f64 / targets as f64 } else { 0.0 },
        false_alarm_rate: if negatives > 0 { false_alarms as f64 / negatives as f64 } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Pixels with `score >= threshold` are flagged.
    pub threshold: f64,
    pub false_alarm_rate: f64,
    pub pd: f64,
}

/// One operating point per distinct score value, from the highest threshold down.
pub fn roc_points(scores: &ScoreMap, gt: &GroundTruth) -> Result<Vec<RocPoint>> {
    if scores.values.len() != gt.mask.len() {
        return Err(Error::dim("scores vs ground truth", gt.mask.len(), scores.values.len()));
    }
    let targets = gt.count();
    let negatives = gt.mask.len() - targets;
    let mut order: Vec<usize> = (0..scores.values.len()).collect();
    order.sort_by(|&a, &b| scores.values[b].total_cmp(&scores.values[a]));

    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let threshold = scores.values[order[k]];
        while k < order.len() && scores.values[order[k]] == threshold {
            if gt.mask[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push(RocPoint {
            threshold,
            false_alarm_rate: if negatives > 0 { fp as f64 / negatives as f64 } else { 0.0 },
            pd: if targets > 0 { tp as f64 / targets as f64 } else { 0.0 },
        });
    }
    Ok(points)
}

/// Trapezoidal area under the ROC curve, anchored at (0, 0).
pub fn roc_auc(points: &[RocPoint]) -> f64 {
    let mut area = 0.0;
    let (mut x0, mut y0) = (0.0, 0.0);
    for p in points {
        area += (p.false_alarm_rate - x0) * (p.pd + y0) / 2.0;
        x0 = p.false_alarm_rate;
        y0 = p.pd;
    }
    area
}
