//! Synthetic scenes under the replacement signal model.
//!
//! A target pixel is `alpha * t + (1 - alpha) * b`: the target displaces a
//! fraction `alpha` of the background spectrum `b` at the same location.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cube::{BandMask, HsiCube};
use crate::dictionary::{load_spectra, SpectrumRecord};
use crate::error::{Error, Result};

/// Fill fractions of the alpha-sweep protocol.
pub const PROTOCOL_ALPHAS: [f64; 8] = [0.01, 0.02, 0.05, 0.1, 0.3, 0.5, 0.8, 1.0];
pub const PROTOCOL_SIZE: usize = 100;
pub const PROTOCOL_SAMPLES: usize = 72;
pub const PROTOCOL_BLOCKS: usize = 7;
pub const PROTOCOL_BLOCK_HEIGHT: usize = 6;
pub const PROTOCOL_BLOCK_WIDTH: usize = 3;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rectangular block of pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl BlockSpec {
    pub fn new(top: usize, left: usize, height: usize, width: usize) -> Self {
        Self { top, left, height, width }
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }

    pub fn fits(&self, height: usize, width: usize) -> bool {
        self.height > 0 && self.width > 0 && self.top + self.height <= height && self.left + self.width <= width
    }

    pub fn overlaps(&self, other: &BlockSpec) -> bool {
        self.top < other.top + other.height
            && other.top < self.top + self.height
            && self.left < other.left + other.width
            && other.left < self.left + self.width
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.top..self.top + self.height).flat_map(move |r| (self.left..self.left + self.width).map(move |c| (r, c)))
    }
}

/// `count` blocks stacked vertically with `gap` rows between them, centered in the scene.
pub fn convoy_layout(
    height: usize,
    width: usize,
    count: usize,
    block_height: usize,
    block_width: usize,
    gap: usize,
) -> Result<Vec<BlockSpec>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let span = count * block_height + (count - 1) * gap;
    if span > height || block_width > width {
        return Err(Error::InvalidArgument(format!(
            "convoy of {count} {block_height}x{block_width} blocks with gap {gap} does not fit {height}x{width}"
        )));
    }
    let top0 = (height - span) / 2;
    let left = (width - block_width) / 2;
    Ok((0..count)
        .map(|k| BlockSpec::new(top0 + k * (block_height + gap), left, block_height, block_width))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImplantPlan {
    target: Vec<f64>,
    alpha: f64,
    blocks: Vec<BlockSpec>,
}

impl ImplantPlan {
    pub fn new(target: Vec<f64>, alpha: f64, blocks: Vec<BlockSpec>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("fill fraction must lie in (0, 1], got {alpha}")));
        }
        if let Some(index) = target.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "target spectrum",
                index,
            });
        }
        for (i, a) in blocks.iter().enumerate() {
            if a.height == 0 || a.width == 0 {
                return Err(Error::InvalidArgument(format!("block {i} is empty")));
            }
            if let Some(j) = blocks[i + 1..].iter().position(|b| a.overlaps(b)) {
                return Err(Error::InvalidArgument(format!("blocks {i} and {} overlap", i + 1 + j)));
            }
        }
        Ok(Self { target, alpha, blocks })
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }
}

/// Which pixels carry an implanted target, and at what fill fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub height: usize,
    pub width: usize,
    /// Row-major, `true` at implanted pixels.
    pub mask: Vec<bool>,
    pub alpha: f64,
}

impl GroundTruth {
    pub fn new(height: usize, width: usize, mask: Vec<bool>, alpha: f64) -> Result<Self> {
        if mask.len() != height * width {
            return Err(Error::dim("ground-truth mask", height * width, mask.len()));
        }
        Ok(Self { height, width, mask, alpha })
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Flat (row-major) indices of target pixels.
    pub fn indices(&self) -> Vec<usize> {
        self.mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect()
    }
}

/// Applies the replacement model inside the plan's blocks.
pub fn implant(cube: &HsiCube, plan: &ImplantPlan) -> Result<(HsiCube, GroundTruth)> {
    if plan.target.len() != cube.bands() {
        return Err(Error::dim("target spectrum length", cube.bands(), plan.target.len()));
    }
    let (h, w) = (cube.height(), cube.width());
    let mut out = cube.clone();
    let mut mask = vec![false; h * w];
    let a = plan.alpha;
    for (i, block) in plan.blocks.iter().enumerate() {
        if !block.fits(h, w) {
            return Err(Error::InvalidArgument(format!(
                "block {i} at ({}, {}) size {}x{} exceeds the {h}x{w} scene",
                block.top, block.left, block.height, block.width
            )));
        }
        for (r, c) in block.pixels() {
            let mixed: Vec<f64> = (0..cube.bands())
                .map(|b| a * plan.target[b] + (1.0 - a) * cube.get(r, c, b))
                .collect();
            out.set_pixel(r, c, &mixed)?;
            mask[r * w + c] = true;
        }
    }
    Ok((out, GroundTruth::new(h, w, mask, a)?))
}

/// AVIRIS band centers: 224 bands evenly spaced over 0.4046-2.4573 um.
pub fn aviris_wavelengths() -> Vec<f64> {
    let (lo, hi) = (0.4046, 2.4573);
    (0..224).map(|i| lo + (hi - lo) * i as f64 / 223.0).collect()
}

/// The 186 AVIRIS band centers left after dropping the water-absorption bands.
pub fn retained_wavelengths() -> Vec<f64> {
    let all = aviris_wavelengths();
    BandMask::aviris_water()
        .kept(all.len())
        .expect("static mask fits 224 bands")
        .into_iter()
        .map(|b| all[b])
        .collect()
}

fn linear_grid(bands: usize) -> Vec<f64> {
    if bands == 1 {
        return vec![1.45];
    }
    (0..bands).map(|i| 0.4 + 2.1 * i as f64 / (bands - 1) as f64).collect()
}

fn gaussian(x: f64, center: f64, width: f64) -> f64 {
    let z = (x - center) / width;
    (-0.5 * z * z).exp()
}

/// A smooth random spectrum in roughly [0.05, 0.95].
fn random_spectrum(wl: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let base = rng.gen_range(0.2..0.5);
    let slope = rng.gen_range(-0.1..0.1);
    let bumps: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(0.4..2.5), rng.gen_range(0.05..0.4), rng.gen_range(-0.2..0.3)))
        .collect();
    wl.iter()
        .map(|&x| {
            let v = base + slope * (x - 1.45) + bumps.iter().map(|&(c, s, a)| a * gaussian(x, c, s)).sum::<f64>();
            v.clamp(0.05, 0.95)
        })
        .collect()
}

/// A smooth random map in [0.2, 1] over an `h x w` grid.
fn random_abundance(h: usize, w: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let blobs: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.15..0.6),
                rng.gen_range(0.3..1.0),
            )
        })
        .collect();
    let (gx, gy) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let raw: Vec<f64> = (0..h * w)
        .map(|i| {
            let y = (i / w) as f64 / h.max(2).saturating_sub(1) as f64;
            let x = (i % w) as f64 / w.max(2).saturating_sub(1) as f64;
            let mut v = gx * x + gy * y;
            for &(cx, cy, s, a) in &blobs {
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                v += a * (-0.5 * d2 / (s * s)).exp();
            }
            v
        })
        .collect();
    let (lo, hi) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    raw.iter().map(|&v| 0.2 + 0.8 * (v - lo) / span).collect()
}

/// Background of exact rank `rank`: `rank` smooth endmember spectra mixed by
/// smooth abundance maps, with values in [0, 1].
pub fn synth_background(height: usize, width: usize, bands: usize, rank: usize, seed: u64) -> Result<HsiCube> {
    if rank == 0 || rank > (height * width).min(bands) {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside 1..={} for a {height}x{width}x{bands} scene",
            (height * width).min(bands)
        )));
    }
    let mut rng = rng(seed);
    let wl = linear_grid(bands);
    let endmembers: Vec<Vec<f64>> = (0..rank).map(|_| random_spectrum(&wl, &mut rng)).collect();
    let maps: Vec<Vec<f64>> = (0..rank).map(|_| random_abundance(height, width, &mut rng)).collect();
    let scale = 1.0 / rank as f64;
    HsiCube::from_fn(height, width, bands, |r, c, b| {
        let i = r * width + c;
        scale * (0..rank).map(|k| maps[k][i] * endmembers[k][b]).sum::<f64>()
    })
}

/// Background tiled from pure samples, one uniformly drawn sample per pixel.
pub fn replicate_background(samples: &[Vec<f64>], height: usize, width: usize, seed: u64) -> Result<HsiCube> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one background sample".into()))?;
    let bands = first.len();
    if let Some(bad) = samples.iter().position(|s| s.len() != bands) {
        return Err(Error::dim("background sample length", bands, samples[bad].len()));
    }
    let mut rng = rng(seed);
    let picks: Vec<usize> = (0..height * width).map(|_| rng.gen_range(0..samples.len())).collect();
    HsiCube::from_fn(height, width, bands, |r, c, b| samples[picks[r * width + c]][b])
}

/// Adds i.i.d. zero-mean Gaussian noise.
pub fn add_noise(cube: &HsiCube, sigma: f64, seed: u64) -> Result<HsiCube> {
    if sigma == 0.0 {
        return Ok(cube.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(format!("noise sigma: {e}")))?;
    let mut rng = rng(seed);
    let data: Vec<f64> = cube.data().iter().map(|&v| v + normal.sample(&mut rng)).collect();
    HsiCube::new(cube.height(), cube.width(), cube.bands(), data)
}

/// Alunite-like background samples: a continuum with absorption features near
/// 1.48, 1.76 and 2.17 um, varied in gain, slope and feature depth. Every
/// sample lies in a four-dimensional spectral subspace.
pub fn synthetic_alunite_samples(wavelengths: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    let continuum = |x: f64| 0.35 + 0.25 * (1.0 - (-(x - 0.4) / 0.5).exp());
    let base: Vec<f64> = wavelengths
        .iter()
        .map(|&x| {
            continuum(x) * (1.0 - 0.25 * gaussian(x, 1.48, 0.03) - 0.2 * gaussian(x, 1.76, 0.035) - 0.35 * gaussian(x, 2.17, 0.04))
        })
        .collect();
    let slope: Vec<f64> = wavelengths.iter().map(|&x| 0.05 * (x - 1.45)).collect();
    let depth: Vec<f64> = wavelengths.iter().map(|&x| -0.08 * gaussian(x, 2.17, 0.04)).collect();
    let iron: Vec<f64> = wavelengths.iter().map(|&x| -0.06 * gaussian(x, 0.9, 0.12)).collect();
    (0..count)
        .map(|_| {
            let gain = rng.gen_range(0.8..1.15);
            let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
            (0..wavelengths.len())
                .map(|i| gain * (base[i] + a * slope[i] + b * depth[i] + c * iron[i]))
                .collect()
        })
        .collect()
}

/// Buddingtonite-like target: bright continuum with a narrow N-H absorption
/// at 2.12 um and weaker features near 1.56 and 2.02 um.
pub fn synthetic_target_spectrum(wavelengths: &[f64]) -> Vec<f64> {
    wavelengths
        .iter()
        .map(|&x| {
            let continuum = 0.45 + 0.2 * (1.0 - (-(x - 0.4) / 0.35).exp()) - 0.04 * (x - 1.45);
            continuum * (1.0 - 0.45 * gaussian(x, 2.12, 0.018) - 0.15 * gaussian(x, 1.56, 0.025) - 0.12 * gaussian(x, 2.02, 0.03))
        })
        .collect()
}

/// One scene of a protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolScene {
    pub cube: HsiCube,
    pub truth: GroundTruth,
    pub alpha: f64,
}

/// A shared background, its implanted target, and one scene per fill fraction.
#[derive(Debug, Clone)]
pub struct SceneSet {
    pub background: HsiCube,
    pub target: SpectrumRecord,
    pub scenes: Vec<ProtocolScene>,
}

fn implant_all(background: &HsiCube, target: &[f64], alphas: &[f64], blocks: &[BlockSpec]) -> Result<Vec<ProtocolScene>> {
    alphas
        .iter()
        .map(|&alpha| {
            let plan = ImplantPlan::new(target.to_vec(), alpha, blocks.to_vec())?;
            let (cube, truth) = implant(background, &plan)?;
            Ok(ProtocolScene { cube, truth, alpha })
        })
        .collect()
}

/// The alpha sweep on a 100x100x186 replicated alunite-like background with
/// seven 6x3 blocks in a vertical convoy, one scene per value of [`PROTOCOL_ALPHAS`].
pub fn alpha_sweep_protocol(seed: u64) -> Result<SceneSet> {
    let wl = retained_wavelengths();
    let samples = synthetic_alunite_samples(&wl, PROTOCOL_SAMPLES, seed);
    let background = replicate_background(&samples, PROTOCOL_SIZE, PROTOCOL_SIZE, seed.wrapping_add(1))?;
    let target = synthetic_target_spectrum(&wl);
    let blocks = convoy_layout(
        PROTOCOL_SIZE,
        PROTOCOL_SIZE,
        PROTOCOL_BLOCKS,
        PROTOCOL_BLOCK_HEIGHT,
        PROTOCOL_BLOCK_WIDTH,
        PROTOCOL_BLOCK_HEIGHT,
    )?;
    let scenes = implant_all(&background, &target, &PROTOCOL_ALPHAS, &blocks)?;
    Ok(SceneSet {
        background,
        target: SpectrumRecord {
            name: "target".into(),
            wavelengths: Some(wl),
            reflectance: target,
        },
        scenes,
    })
}

/// Scene description file. Parsed from key/value text by the front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    pub background: BackgroundSpec,
    #[serde(default)]
    pub target: TargetSpec,
    pub alphas: Vec<f64>,
    pub layout: LayoutSpec,
    #[serde(default)]
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BackgroundSpec {
    /// Exact low-rank mixture on an evenly spaced band grid.
    LowRank { bands: usize, rank: usize },
    /// Pixels drawn from the spectra in a CSV file.
    Samples { path: PathBuf },
    /// Alunite-like samples on the 186 retained AVIRIS bands.
    SyntheticAlunite {
        #[serde(default = "default_sample_count")]
        samples: usize,
    },
}

fn default_sample_count() -> usize {
    PROTOCOL_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    /// Buddingtonite-like synthetic spectrum on the scene's band grid.
    #[default]
    Synthetic,
    /// A named column (or the first) of a spectra CSV file.
    File { path: PathBuf, column: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LayoutSpec {
    Convoy {
        blocks: usize,
        block_height: usize,
        block_width: usize,
        gap: usize,
    },
    Explicit { blocks: Vec<BlockSpec> },
}

impl SceneSpec {
    /// The alpha-sweep protocol as a spec.
    pub fn alpha_sweep(seed: u64) -> Self {
        Self {
            height: PROTOCOL_SIZE,
            width: PROTOCOL_SIZE,
            seed,
            background: BackgroundSpec::SyntheticAlunite {
                samples: PROTOCOL_SAMPLES,
            },
            target: TargetSpec::Synthetic,
            alphas: PROTOCOL_ALPHAS.to_vec(),
            layout: LayoutSpec::Convoy {
                blocks: PROTOCOL_BLOCKS,
                block_height: PROTOCOL_BLOCK_HEIGHT,
                block_width: PROTOCOL_BLOCK_WIDTH,
                gap: PROTOCOL_BLOCK_HEIGHT,
            },
            noise_sigma: 0.0,
        }
    }

    /// Builds the scenes; relative file paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<SceneSet> {
        if self.alphas.is_empty() {
            return Err(Error::InvalidArgument("alphas: at least one fill fraction is required".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise_sigma: must be >= 0, got {}", self.noise_sigma)));
        }
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };

        let (background, wavelengths) = match &self.background {
            BackgroundSpec::LowRank { bands, rank } => (
                synth_background(self.height, self.width, *bands, *rank, self.seed)?,
                linear_grid(*bands),
            ),
            BackgroundSpec::Samples { path } => {
                let recs = load_spectra(&resolve(path))?;
                let wl = recs[0].wavelengths.clone().unwrap_or_else(|| linear_grid(recs[0].reflectance.len()));
                let samples: Vec<Vec<f64>> = recs.into_iter().map(|r| r.reflectance).collect();
                (replicate_background(&samples, self.height, self.width, self.seed)?, wl)
            }
            BackgroundSpec::SyntheticAlunite { samples } => {
                let wl = retained_wavelengths();
                let s = synthetic_alunite_samples(&wl, *samples, self.seed);
                (replicate_background(&s, self.height, self.width, self.seed.wrapping_add(1))?, wl)
            }
        };

        let target = match &self.target {
            TargetSpec::Synthetic => SpectrumRecord {
                name: "target".into(),
                reflectance: synthetic_target_spectrum(&wavelengths),
                wavelengths: Some(wavelengths),
            },
            TargetSpec::File { path, column } => {
                let recs = load_spectra(&resolve(path))?;
                match column {
                    None => recs.into_iter().next().expect("load_spectra returns at least one record"),
                    Some(name) => recs
                        .into_iter()
                        .find(|r| &r.name == name)
                        .ok_or_else(|| Error::InvalidArgument(format!("target.column: no spectrum named {name:?}")))?,
                }
            }
        };

        let blocks = match &self.layout {
            LayoutSpec::Convoy {
                blocks,
                block_height,
                block_width,
                gap,
            } => convoy_layout(self.height, self.width, *blocks, *block_height, *block_width, *gap)?,
            LayoutSpec::Explicit { blocks } => blocks.clone(),
        };

        let mut scenes = implant_all(&background, &target.reflectance, &self.alphas, &blocks)?;
        if self.noise_sigma > 0.0 {
            let noise_seed = self.seed.wrapping_add(2);
            for s in &mut scenes {
                s.cube = add_noise(&s.cube, self.noise_sigma, noise_seed)?;
            }
        }
        Ok(SceneSet {
            background,
            target,
            scenes,
        })
    }
}

/// Draws `count` distinct flat pixel indices; handy for scattering single-pixel targets.
pub fn random_pixels(height: usize, width: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..height * width).collect();
    idx.shuffle(&mut rng(seed));
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::flatten;
    use crate::prox::thin_svd;

    #[test]
    fn rank_one_background_is_scaled_spectrum() {
        let cube = synth_background(6, 5, 20, 1, 3).unwrap();
        let p0 = cube.pixel(0, 0);
        for r in 0..6 {
            for c in 0..5 {
                let p = cube.pixel(r, c);
                let k = p[0] / p0[0];
                assert!(p.iter().zip(&p0).all(|(a, b)| (a - k * b).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn rank_three_background() {
        let cube = synth_background(30, 30, 50, 3, 7).unwrap();
        assert!(cube.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let m = flatten(&cube);
        let s = m.as_mat().singular_values().unwrap();
        assert!(s[2] / s[0] > 1e-6, "third singular value collapsed: {s:?}");
        assert!(s[3] / s[0] <= 1e-10, "{}", s[3] / s[0]);
        assert_eq!(synth_background(30, 30, 50, 3, 7).unwrap(), cube);
        assert_ne!(synth_background(30, 30, 50, 3, 8).unwrap(), cube);
        assert!(synth_background(2, 2, 50, 5, 7).is_err());
        assert!(synth_background(4, 4, 5, 0, 7).is_err());
    }

    #[test]
    fn replicated_background_rank() {
        let wl = retained_wavelengths();
        let one = synthetic_alunite_samples(&wl, 1, 0);
        let cube = replicate_background(&one, 10, 10, 1).unwrap();
        assert_eq!(thin_svd(flatten(&cube).as_mat().as_ref(), 1e-10).unwrap().rank(), 1);

        let many = synthetic_alunite_samples(&wl, 72, 0);
        let cube = replicate_background(&many, 100, 100, 1).unwrap();
        let rank = thin_svd(flatten(&cube).as_mat().as_ref(), 1e-10).unwrap().rank();
        assert!(rank <= 72 && rank >= 1);
        assert_eq!(replicate_background(&many, 100, 100, 1).unwrap(), cube);
    }

    #[test]
    fn implant_full_and_half() {
        let bg = HsiCube::from_fn(4, 4, 3, |r, c, b| 0.1 * (r + c + b) as f64).unwrap();
        let t = vec![1.0, 0.5, 0.25];
        let block = vec![BlockSpec::new(1, 1, 2, 2)];
        let (full, gt) = implant(&bg, &ImplantPlan::new(t.clone(), 1.0, block.clone()).unwrap()).unwrap();
        assert_eq!(full.pixel(1, 2), t);
        assert_eq!(full.pixel(0, 0), bg.pixel(0, 0));
        assert_eq!(gt.count(), 4);
        assert_eq!(gt.indices(), vec![5, 6, 9, 10]);

        let (half, _) = implant(&bg, &ImplantPlan::new(t.clone(), 0.5, block).unwrap()).unwrap();
        for b in 0..3 {
            assert!((half.get(2, 2, b) - 0.5 * (t[b] + bg.get(2, 2, b))).abs() < 1e-15);
        }
    }

    #[test]
    fn implant_rejects_bad_plans() {
        let bg = HsiCube::zeros(4, 4, 2).unwrap();
        assert!(ImplantPlan::new(vec![1.0, 1.0], 0.0, vec![]).is_err());
        assert!(ImplantPlan::new(vec![1.0, 1.0], 1.5, vec![]).is_err());
        assert!(ImplantPlan::new(vec![1.0, 1.0], 0.5, vec![BlockSpec::new(0, 0, 2, 2), BlockSpec::new(1, 1, 2, 2)]).is_err());
        let out = ImplantPlan::new(vec![1.0, 1.0], 0.5, vec![BlockSpec::new(3, 3, 2, 2)]).unwrap();
        assert!(implant(&bg, &out).is_err());
        let short = ImplantPlan::new(vec![1.0], 0.5, vec![]).unwrap();
        assert!(implant(&bg, &short).is_err());
    }

    #[test]
    fn convoy_of_seven() {
        let blocks = convoy_layout(100, 100, 7, 6, 3, 6).unwrap();
        assert_eq!(blocks.len(), 7);
        let bg = HsiCube::zeros(100, 100, 2).unwrap();
        let (_, gt) = implant(&bg, &ImplantPlan::new(vec![1.0, 1.0], 1.0, blocks).unwrap()).unwrap();
        assert_eq!(gt.count(), 126);
        assert!(convoy_layout(20, 20, 7, 6, 3, 6).is_err());
    }

    #[test]
    fn aviris_grid() {
        let wl = retained_wavelengths();
        assert_eq!(wl.len(), 186);
        assert!(wl.windows(2).all(|w| w[0] < w[1]));
        assert!((aviris_wavelengths()[223] - 2.4573).abs() < 1e-12);
    }

    #[test]
    fn protocol_shape() {
        let set = alpha_sweep_protocol(11).unwrap();
        assert_eq!(set.scenes.len(), 8);
        let bg = &set.background;
        assert_eq!((bg.height(), bg.width(), bg.bands()), (100, 100, 186));
        for s in &set.scenes {
            assert_eq!(s.truth.count(), 126);
            for (i, &m) in s.truth.mask.iter().enumerate() {
                let (r, c) = (i / 100, i % 100);
                if !m {
                    assert_eq!(s.cube.pixel(r, c), bg.pixel(r, c));
                }
            }
        }
        let low = &set.scenes[0];
        assert_eq!(low.alpha, 0.01);
        for i in low.truth.indices() {
            let (r, c) = (i / 100, i % 100);
            for b in 0..186 {
                assert!((low.cube.get(r, c, b) - bg.get(r, c, b)).abs() <= 0.01);
            }
        }
    }

    #[test]
    fn noise_is_seeded() {
        let bg = HsiCube::zeros(3, 3, 2).unwrap();
        let a = add_noise(&bg, 0.1, 5).unwrap();
        assert_eq!(a, add_noise(&bg, 0.1, 5).unwrap());
        assert_ne!(a, bg);
        assert_eq!(add_noise(&bg, 0.0, 5).unwrap(), bg);
    }

    #[test]
    fn spec_builds_low_rank_scene() {
        let spec = SceneSpec {
            height: 12,
            width: 10,
            seed: 3,
            background: BackgroundSpec::LowRank { bands: 20, rank: 2 },
            target: TargetSpec::Synthetic,
            alphas: vec![1.0, 0.5],
            layout: LayoutSpec::Explicit {
                blocks: vec![BlockSpec::new(2, 2, 3, 2)],
            },
            noise_sigma: 0.0,
        };
        let set = spec.build(Path::new(".")).unwrap();
        assert_eq!(set.scenes.len(), 2);
        assert_eq!(set.scenes[0].truth.count(), 6);
        assert_eq!(set.target.reflectance.len(), 20);
    }
}
