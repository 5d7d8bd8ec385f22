//! Deterministic inputs for the benchmarks in `benches/`.

use hsi_rpca::faer::Mat;

/// A smooth, full-rank `rows x cols` matrix; no RNG so runs are comparable.
pub fn dense(rows: usize, cols: usize) -> Mat<f64> {
    Mat::from_fn(rows, cols, |i, j| ((i * 7 + j * 13) as f64 * 0.37).sin() + 0.01 * (i as f64 - j as f64))
}

/// `(D, At)` with a rank-`rank` background plus a few dictionary pixels.
pub fn problem(pixels: usize, bands: usize, atoms: usize, rank: usize) -> (Mat<f64>, Mat<f64>) {
    let u = dense(pixels, rank);
    let v = Mat::from_fn(rank, bands, |i, j| ((i + 1) as f64 * (j as f64 * 0.05 + 0.3)).cos());
    let at = Mat::from_fn(bands, atoms, |i, k| 0.5 + 0.4 * ((i as f64) * 0.11 * (k + 1) as f64).sin());
    let mut d = &u * &v;
    for p in (0..pixels).step_by(pixels.max(20) / 20) {
        for b in 0..bands {
            d[(p, b)] += (0..atoms).map(|k| at[(b, k)]).sum::<f64>();
        }
    }
    (d, at)
}
