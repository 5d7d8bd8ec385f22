//! On-disk formats.
//!
//! * Cubes: a JSON header (`.hsic`) next to a raw little-endian `f64` payload
//!   (`.raw`) in band-sequential order.
//! * Masks: binary PGM (`P5`, maxval 255, 0 = background, 255 = target). The
//!   fill fraction of a ground-truth mask rides along as an `# alpha=` comment.
//! * Score maps: 16-bit PGM scaled so the maximum score maps to 65535, with the
//!   scale factor in a `.scale.txt` sidecar, plus a full-precision CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use faer::MatRef;
use serde::{Deserialize, Serialize};

use crate::cube::HsiCube;
use crate::detect::{BinaryMask, ScoreMap};
use crate::error::{Error, Result};
use crate::scene::GroundTruth;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeHeader {
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub dtype: String,
    pub byte_order: String,
    pub interleave: String,
    /// Payload file name, relative to the header's directory.
    pub payload: String,
}

/// Payload path for a header path: same stem, `.raw` extension.
pub fn payload_path(header: &Path) -> PathBuf {
    header.with_extension("raw")
}

pub fn write_cube(cube: &HsiCube, path: &Path) -> Result<()> {
    let raw = payload_path(path);
    let header = CubeHeader {
        height: cube.height(),
        width: cube.width(),
        bands: cube.bands(),
        dtype: "f64".into(),
        byte_order: "little".into(),
        interleave: "bsq".into(),
        payload: raw
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let mut text = serde_json::to_string_pretty(&header).expect("header serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::with_capacity(cube.data().len() * 8);
    for v in cube.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&raw, bytes).map_err(|e| Error::io(&raw, e))
}

pub fn read_cube(path: &Path) -> Result<HsiCube> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: CubeHeader =
        serde_json::from_str(&text).map_err(|e| Error::format("cube header", path, e.to_string()))?;
    if header.dtype != "f64" || header.byte_order != "little" || header.interleave != "bsq" {
        return Err(Error::format(
            "cube header",
            path,
            format!(
                "unsupported layout dtype={} byte_order={} interleave={}",
                header.dtype, header.byte_order, header.interleave
            ),
        ));
    }
    if header.height == 0 || header.width == 0 || header.bands == 0 {
        return Err(Error::format("cube header", path, "dimensions must be positive"));
    }
    let raw = path.parent().unwrap_or(Path::new("")).join(&header.payload);
    let bytes = fs::read(&raw).map_err(|e| Error::io(&raw, e))?;
    let expected = header.height * header.width * header.bands * 8;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            path: raw,
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::format(
            "cube payload",
            raw,
            format!("{} trailing bytes after {expected}", bytes.len() - expected),
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    HsiCube::new(header.height, header.width, header.bands, data)
}

fn pgm_bytes(width: usize, height: usize, maxval: u32, comment: Option<&str>, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 64);
    out.extend_from_slice(b"P5\n");
    if let Some(c) = comment {
        out.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    out.extend_from_slice(format!("{width} {height}\n{maxval}\n").as_bytes());
    out.extend_from_slice(payload);
    out
}

struct Pgm {
    width: usize,
    height: usize,
    maxval: u32,
    comments: Vec<String>,
    samples: Vec<u16>,
}

fn parse_pgm(bytes: &[u8], path: &Path) -> Result<Pgm> {
    let bad = |reason: &str| Error::format("PGM", path, reason.to_string());
    let mut pos = 0;
    let mut comments = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(bad("truncated header"));
        }
        if bytes[pos] == b'#' {
            let start = pos + 1;
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            comments.push(String::from_utf8_lossy(&bytes[start..pos]).trim().to_string());
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if tokens[0] != "P5" {
        return Err(bad("not a binary PGM (P5)"));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
    let (width, height, maxval) = (parse(&tokens[1])?, parse(&tokens[2])?, parse(&tokens[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let wide = maxval > 255;
    let n = width * height;
    let need = if wide { 2 * n } else { n };
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() < need {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: need,
            found: raster.len(),
        });
    }
    let samples = if wide {
        raster[..need].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        raster[..need].iter().map(|&b| u16::from(b)).collect()
    };
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u32,
        comments,
        samples,
    })
}

pub fn write_mask_pgm(mask: &BinaryMask, path: &Path, comment: Option<&str>) -> Result<()> {
    let payload: Vec<u8> = mask.values.iter().map(|&m| if m { 255 } else { 0 }).collect();
    fs::write(path, pgm_bytes(mask.width, mask.height, 255, comment, &payload)).map_err(|e| Error::io(path, e))
}

pub fn read_mask_pgm(path: &Path) -> Result<BinaryMask> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let pgm = parse_pgm(&bytes, path)?;
    BinaryMask::new(pgm.height, pgm.width, pgm.samples.iter().map(|&v| v > 0).collect())
}

pub fn write_ground_truth(gt: &GroundTruth, path: &Path) -> Result<()> {
    let mask = BinaryMask::from(gt);
    write_mask_pgm(&mask, path, Some(&format!("alpha={}", gt.alpha)))
}

/// Reads a ground-truth mask. `alpha` is NaN when the file does not record it.
pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let pgm = parse_pgm(&bytes, path)?;
    let alpha = pgm
        .comments
        .iter()
        .find_map(|c| c.strip_prefix("alpha=").and_then(|v| v.trim().parse().ok()))
        .unwrap_or(f64::NAN);
    GroundTruth::new(pgm.height, pgm.width, pgm.samples.iter().map(|&v| v > 0).collect(), alpha)
}

/// Sidecar path holding the score scale factor.
pub fn scale_sidecar(path: &Path) -> PathBuf {
    path.with_extension("scale.txt")
}

/// 16-bit PGM with `value = round(score / max * 65535)`; the sidecar records
/// `scale = max / 65535` so `score ~= value * scale`.
pub fn write_score_pgm(scores: &ScoreMap, path: &Path) -> Result<()> {
    let max = scores.max();
    let scale = if max > 0.0 { max / 65535.0 } else { 0.0 };
    let mut payload = Vec::with_capacity(scores.values.len() * 2);
    for &s in &scores.values {
        let v = if max > 0.0 { (s / max * 65535.0).round().clamp(0.0, 65535.0) as u16 } else { 0 };
        payload.extend_from_slice(&v.to_be_bytes());
    }
    fs::write(path, pgm_bytes(scores.width, scores.height, 65535, None, &payload)).map_err(|e| Error::io(path, e))?;
    let side = scale_sidecar(path);
    fs::write(&side, format!("scale {scale}\nmax {max}\n")).map_err(|e| Error::io(&side, e))
}

/// Reads a 16-bit score PGM back, applying the sidecar scale.
pub fn read_score_pgm(path: &Path) -> Result<ScoreMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let pgm = parse_pgm(&bytes, path)?;
    let side = scale_sidecar(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let scale = text
        .lines()
        .find_map(|l| l.strip_prefix("scale ").and_then(|v| v.trim().parse::<f64>().ok()))
        .ok_or_else(|| Error::format("score sidecar", &side, "missing `scale` line"))?;
    let unit = scale * 65535.0 / f64::from(pgm.maxval);
    Ok(ScoreMap {
        height: pgm.height,
        width: pgm.width,
        values: pgm.samples.iter().map(|&v| f64::from(v) * unit).collect(),
    })
}

pub fn write_score_csv(scores: &ScoreMap, path: &Path) -> Result<()> {
    let mut out = String::new();
    for r in 0..scores.height {
        let row: Vec<String> = (0..scores.width).map(|c| scores.get(r, c).to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_score_csv(path: &Path) -> Result<ScoreMap> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut width = None;
    let mut height = 0;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::format("score CSV", path, format!("non-numeric cell on line {}", i + 1)))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::format("score CSV", path, format!("ragged row on line {}", i + 1)))
            }
            _ => {}
        }
        values.extend(row);
        height += 1;
    }
    let width = width.ok_or_else(|| Error::format("score CSV", path, "empty file"))?;
    Ok(ScoreMap { height, width, values })
}

/// Coefficients as CSV, one row per pixel: `pixel,row,col,<atom labels...>`.
pub fn write_coefficients_csv(c: MatRef<'_, f64>, labels: &[String], width: usize, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(w, "pixel,row,col").map_err(io)?;
    for l in labels {
        write!(w, ",{l}").map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for j in 0..c.ncols() {
        write!(w, "{j},{},{}", j / width, j % width).map_err(io)?;
        for i in 0..c.nrows() {
            write!(w, ",{}", c[(i, j)]).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}
