//! Target dictionaries built from spectral sample files.
//!
//! The spectra CSV has a header row of names and one spectrum per column. An
//! optional leading `wavelength_um` column carries the shared band centers.
//! Values are written with Rust's shortest round-trip float formatting, so a
//! write/read cycle is value-exact.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};

pub const WAVELENGTH_COLUMN: &str = "wavelength_um";

/// One labelled reflectance spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub name: String,
    /// Band centers in micrometers, strictly ascending, same length as `reflectance`.
    pub wavelengths: Option<Vec<f64>>,
    pub reflectance: Vec<f64>,
}

impl SpectrumRecord {
    pub fn new(name: impl Into<String>, reflectance: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            wavelengths: None,
            reflectance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(index) = self.reflectance.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "spectrum reflectance",
                index,
            });
        }
        if let Some(w) = &self.wavelengths {
            if w.len() != self.reflectance.len() {
                return Err(Error::dim("wavelength grid", self.reflectance.len(), w.len()));
            }
            if w.windows(2).any(|p| !(p[0] < p[1])) {
                return Err(Error::InvalidArgument(format!(
                    "wavelengths of {} are not strictly ascending",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// The `p x Nt` matrix whose columns are target spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDictionary {
    spectra: Mat<f64>,
    labels: Vec<String>,
    normalized: bool,
}

impl TargetDictionary {
    /// Wraps a `p x Nt` matrix. Needs at least one column, no zero column,
    /// and finite entries.
    pub fn new(spectra: Mat<f64>, labels: Vec<String>) -> Result<Self> {
        if spectra.ncols() == 0 || spectra.nrows() == 0 {
            return Err(Error::InvalidArgument("dictionary needs at least one non-empty column".into()));
        }
        if labels.len() != spectra.ncols() {
            return Err(Error::dim("dictionary labels", spectra.ncols(), labels.len()));
        }
        crate::linalg::ensure_finite(spectra.as_ref(), "dictionary")?;
        if let Some(j) = (0..spectra.ncols()).find(|&j| spectra.col(j).norm_l2() == 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dictionary column {} ({}) is all zero",
                j, labels[j]
            )));
        }
        Ok(Self {
            spectra,
            labels,
            normalized: false,
        })
    }

    /// Single-column dictionary holding one exact target spectrum.
    pub fn from_spectrum(name: impl Into<String>, spectrum: &[f64]) -> Result<Self> {
        let m = Mat::<f64>::from_fn(spectrum.len(), 1, |i, _| spectrum[i]);
        Self::new(m, vec![name.into()])
    }

    /// Rescales every column to unit l2 norm.
    pub fn normalized(mut self) -> Self {
        for j in 0..self.spectra.ncols() {
            let n = self.spectra.col(j).norm_l2();
            for i in 0..self.spectra.nrows() {
                self.spectra[(i, j)] /= n;
            }
        }
        self.normalized = true;
        self
    }

    pub fn spectra(&self) -> &Mat<f64> {
        &self.spectra
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn bands(&self) -> usize {
        self.spectra.nrows()
    }

    pub fn atoms(&self) -> usize {
        self.spectra.ncols()
    }
}

/// Reads a spectra CSV file.
pub fn load_spectra(path: &Path) -> Result<Vec<SpectrumRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_spectra(file, path)
}

pub fn read_spectra<R: Read>(reader: R, source: &Path) -> Result<Vec<SpectrumRecord>> {
    let bad = |reason: String| Error::format("spectra CSV", source, reason);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(bad("empty file".into()));
    }
    let has_wavelength = &headers[0] == WAVELENGTH_COLUMN;
    let names: Vec<String> = headers
        .iter()
        .skip(usize::from(has_wavelength))
        .map(str::to_owned)
        .collect();
    if names.is_empty() {
        return Err(bad("no spectrum columns".into()));
    }
    let mut seen = HashSet::new();
    for n in &names {
        if n.is_empty() {
            return Err(bad("empty spectrum name in header".into()));
        }
        if !seen.insert(n.as_str()) {
            return Err(bad(format!("duplicate spectrum name {n:?}")));
        }
    }

    let mut wavelengths = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        for (k, cell) in row.iter().enumerate() {
            let value: f64 = cell
                .parse()
                .map_err(|_| bad(format!("non-numeric cell {cell:?} on data row {}", line + 1)))?;
            if has_wavelength && k == 0 {
                wavelengths.push(value);
            } else {
                columns[k - usize::from(has_wavelength)].push(value);
            }
        }
    }
    if columns[0].is_empty() {
        return Err(bad("no data rows".into()));
    }

    let records: Vec<SpectrumRecord> = names
        .into_iter()
        .zip(columns)
        .map(|(name, reflectance)| SpectrumRecord {
            name,
            wavelengths: has_wavelength.then(|| wavelengths.clone()),
            reflectance,
        })
        .collect();
    for r in &records {
        r.validate()?;
    }
    Ok(records)
}

/// Writes records as a spectra CSV. All records must share length and wavelength grid.
pub fn write_spectra(path: &Path, records: &[SpectrumRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_spectra_to(file, records).map_err(|e| match e {
        Error::Format { kind, reason, .. } => Error::format(kind, path, reason),
        other => other,
    })
}

pub fn write_spectra_to<W: Write>(writer: W, records: &[SpectrumRecord]) -> Result<()> {
    let bad = |reason: String| Error::format("spectra CSV", "<writer>", reason);
    let first = records.first().ok_or_else(|| bad("no records to write".into()))?;
    let n = first.reflectance.len();
    for r in records {
        r.validate()?;
        if r.reflectance.len() != n {
            return Err(Error::dim("spectrum length", n, r.reflectance.len()));
        }
        if r.wavelengths != first.wavelengths {
            return Err(bad(format!("record {} has a different wavelength grid", r.name)));
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = Vec::new();
    if first.wavelengths.is_some() {
        header.push(WAVELENGTH_COLUMN);
    }
    header.extend(records.iter().map(|r| r.name.as_str()));
    w.write_record(&header).map_err(|e| bad(e.to_string()))?;
    for i in 0..n {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        if let Some(wl) = &first.wavelengths {
            row.push(wl[i].to_string());
        }
        row.extend(records.iter().map(|r| r.reflectance[i].to_string()));
        w.write_record(&row).map_err(|e| bad(e.to_string()))?;
    }
    w.flush().map_err(|e| bad(e.to_string()))?;
    Ok(())
}

/// Stacks records as dictionary columns, in order.
pub fn build_dictionary(records: &[SpectrumRecord], expected_bands: usize) -> Result<TargetDictionary> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no spectra to build a dictionary from".into()));
    }
    for r in records {
        r.validate()?;
        if r.reflectance.len() != expected_bands {
            return Err(Error::InvalidArgument(format!(
                "spectrum {} has {} bands, expected {expected_bands}",
                r.name,
                r.reflectance.len()
            )));
        }
    }
    let m = Mat::<f64>::from_fn(expected_bands, records.len(), |i, j| records[j].reflectance[i]);
    TargetDictionary::new(m, records.iter().map(|r| r.name.clone()).collect())
}
