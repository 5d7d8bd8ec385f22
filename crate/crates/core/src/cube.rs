//! Hyperspectral cube container and its matrix view.
//!
//! A cube is stored band-sequential: the full `height x width` plane of band 0,
//! then band 1, and so on, each plane in row-major spatial order. Flattening
//! maps pixel `(r, c)` to matrix row `r * width + c` and band `j` to column `j`,
//! which makes every column of the column-major flat matrix a contiguous copy
//! of one band plane.

use faer::Mat;

use crate::error::{Error, Result};

/// An `height x width x bands` reflectance cube.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    height: usize,
    width: usize,
    bands: usize,
    data: Vec<f64>,
}

impl HsiCube {
    /// Builds a cube from band-sequential data.
    pub fn new(height: usize, width: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || bands == 0 {
            return Err(Error::InvalidArgument(format!(
                "cube dimensions must be positive, got {height}x{width}x{bands}"
            )));
        }
        let expected = height * width * bands;
        if data.len() != expected {
            return Err(Error::dim("cube data length", expected, data.len()));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "cube data",
                index,
            });
        }
        Ok(Self {
            height,
            width,
            bands,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, bands: usize) -> Result<Self> {
        Self::new(height, width, bands, vec![0.0; height * width * bands])
    }

    /// Builds a cube from a per-pixel spectrum function.
    pub fn from_fn(
        height: usize,
        width: usize,
        bands: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * bands);
        for b in 0..bands {
            for r in 0..height {
                for c in 0..width {
                    data.push(f(r, c, b));
                }
            }
        }
        Self::new(height, width, bands, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// Number of pixels, `height * width`.
    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, row: usize, col: usize, band: usize) -> usize {
        debug_assert!(row < self.height && col < self.width && band < self.bands);
        band * self.pixels() + row * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, band: usize) -> f64 {
        self.data[self.offset(row, col, band)]
    }

    /// The `height * width` plane of one band, row-major.
    pub fn band(&self, band: usize) -> &[f64] {
        let n = self.pixels();
        &self.data[band * n..(band + 1) * n]
    }

    pub fn pixel(&self, row: usize, col: usize) -> Vec<f64> {
        (0..self.bands).map(|b| self.get(row, col, b)).collect()
    }

    /// Overwrites one pixel's spectrum. Values must be finite.
    pub fn set_pixel(&mut self, row: usize, col: usize, spectrum: &[f64]) -> Result<()> {
        if spectrum.len() != self.bands {
            return Err(Error::dim("pixel spectrum length", self.bands, spectrum.len()));
        }
        if let Some(index) = spectrum.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "pixel spectrum",
                index,
            });
        }
        for (b, &v) in spectrum.iter().enumerate() {
            let o = self.offset(row, col, b);
            self.data[o] = v;
        }
        Ok(())
    }
}

/// The `e x p` matrix view of a cube, `e = height * width` pixels by `p` bands.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatMatrix(Mat<f64>);

impl FlatMatrix {
    /// Wraps a matrix, rejecting non-finite entries.
    pub fn new(m: Mat<f64>) -> Result<Self> {
        crate::linalg::ensure_finite(m.as_ref(), "flat matrix")?;
        Ok(Self(m))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_mat(&self) -> &Mat<f64> {
        &self.0
    }

    pub fn into_mat(self) -> Mat<f64> {
        self.0
    }
}

/// Lexicographic flattening: pixel `(r, c)` becomes row `r * width + c`.
pub fn flatten(cube: &HsiCube) -> FlatMatrix {
    let e = cube.pixels();
    let mut m = Mat::<f64>::zeros(e, cube.bands());
    for b in 0..cube.bands() {
        m.col_as_slice_mut(b).copy_from_slice(cube.band(b));
    }
    FlatMatrix(m)
}

/// Inverse of [`flatten`].
pub fn unflatten(m: &FlatMatrix, height: usize, width: usize) -> Result<HsiCube> {
    unflatten_mat(m.as_mat(), height, width)
}

pub(crate) fn unflatten_mat(m: &Mat<f64>, height: usize, width: usize) -> Result<HsiCube> {
    if m.nrows() != height * width {
        return Err(Error::dim(
            "unflatten rows",
            format!("{} ({height}x{width})", height * width),
            m.nrows(),
        ));
    }
    let mut data = Vec::with_capacity(m.nrows() * m.ncols());
    for b in 0..m.ncols() {
        data.extend_from_slice(m.col_as_slice(b));
    }
    HsiCube::new(height, width, m.ncols(), data)
}

/// A set of bands to drop, as sorted unique 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BandMask {
    removed: Vec<usize>,
}

impl BandMask {
    pub fn new(mut removed: Vec<usize>) -> Result<Self> {
        removed.sort_unstable();
        if removed.first() == Some(&0) {
            return Err(Error::InvalidArgument("band indices are 1-based".into()));
        }
        if let Some(w) = removed.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate band index {}", w[0])));
        }
        Ok(Self { removed })
    }

    /// Builds a mask from inclusive 1-based ranges.
    pub fn from_ranges(ranges: &[(usize, usize)]) -> Result<Self> {
        let mut removed = Vec::new();
        for &(lo, hi) in ranges {
            if lo > hi {
                return Err(Error::InvalidArgument(format!("empty band range {lo}-{hi}")));
            }
            removed.extend(lo..=hi);
        }
        Self::new(removed)
    }

    /// Water-absorption and edge bands of the 224-band AVIRIS sensor
    /// (1-4, 104-113, 148-167, 221-224), leaving 186 bands.
    ///
    /// The first three ranges alone leave 190; the 186-band Cuprite cube also
    /// drops the last four detector bands.
    pub fn aviris_water() -> Self {
        Self::from_ranges(&[(1, 4), (104, 113), (148, 167), (221, 224)]).expect("static ranges are valid")
    }

    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    /// 0-based indices of the bands that survive on a cube with `bands` bands.
    pub fn kept(&self, bands: usize) -> Result<Vec<usize>> {
        if let Some(&last) = self.removed.last() {
            if last > bands {
                return Err(Error::InvalidArgument(format!(
                    "band index {last} out of range 1..={bands}"
                )));
            }
        }
        let kept: Vec<usize> = (0..bands)
            .filter(|b| self.removed.binary_search(&(b + 1)).is_err())
            .collect();
        if kept.is_empty() {
            return Err(Error::InvalidArgument("band mask removes every band".into()));
        }
        Ok(kept)
    }
}

/// Drops the masked bands, keeping the survivors in order.
pub fn remove_bands(cube: &HsiCube, mask: &BandMask) -> Result<HsiCube> {
    let kept = mask.kept(cube.bands())?;
    let mut data = Vec::with_capacity(kept.len() * cube.pixels());
    for &b in &kept {
        data.extend_from_slice(cube.band(b));
    }
    HsiCube::new(cube.height(), cube.width(), kept.len(), data)
}
