use alloc::vec::Vec;

use super::{FeatureError, FeatureKind, FeatureMatrix, StftFrameGrid};
use crate::math::{ln, round};

/// Lower edge of the first octave band, Hz.
pub const CONTRAST_FMIN: f64 = 200.0;
/// Fraction of sorted magnitudes averaged for the peak and the valley.
pub const CONTRAST_QUANTILE: f64 = 0.02;
const MAG_FLOOR: f64 = 1e-12;

/// `ln(peak) - ln(valley)` for one band; peak and valley are the means of the
/// top and bottom 2 % (at least one) of the sorted magnitudes.
pub fn band_contrast(mags: &[f64]) -> f64 {
    if mags.is_empty() {
        return 0.0;
    }
    let mut sorted = mags.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let q = (round(CONTRAST_QUANTILE * n as f64) as usize).max(1);
    let valley: f64 = sorted[..q].iter().sum::<f64>() / q as f64;
    let peak: f64 = sorted[n - q..].iter().sum::<f64>() / q as f64;
    ln(peak.max(MAG_FLOOR)) - ln(valley.max(MAG_FLOOR))
}

/// `(n_bands + 1) x T` contrast over octave bands `[0, fmin)`,
/// `[fmin 2^(i-1), fmin 2^i)` and a final band up to Nyquist.
pub fn spectral_contrast(
    grid: &StftFrameGrid,
    n_bands: usize,
    fmin: f64,
) -> Result<FeatureMatrix, FeatureError> {
    if n_bands == 0 {
        return Err(FeatureError::InvalidParams {
            field: "n_bands",
            reason: "must be at least 1",
        });
    }
    let top = fmin * (1u64 << n_bands.min(62)) as f64;
    if !(fmin > 0.0 && top < grid.nyquist()) {
        return Err(FeatureError::BadBandEdges {
            fmin,
            fmax: top,
            nyquist: grid.nyquist(),
        });
    }
    let mut edges: Vec<f64> = alloc::vec![0.0];
    edges.extend((0..=n_bands).map(|i| fmin * (1u64 << i) as f64));
    let band_of = |hz: f64| edges.iter().rposition(|&e| hz >= e).unwrap_or(0);
    let ranges: Vec<(usize, usize)> = {
        let mut r = alloc::vec![(usize::MAX, 0usize); n_bands + 1];
        for b in 0..grid.n_bins() {
            let band = band_of(grid.bin_hz(b)).min(n_bands);
            r[band].0 = r[band].0.min(b);
            r[band].1 = b + 1;
        }
        r
    };
    let mut out = FeatureMatrix::zeros(FeatureKind::Contrast, n_bands + 1, grid.n_frames());
    for t in 0..grid.n_frames() {
        let mags = grid.magnitudes(t);
        for (band, &(a, b)) in ranges.iter().enumerate() {
            let v = if a < b { band_contrast(&mags[a..b]) } else { 0.0 };
            out.set(band, t, v);
        }
    }
    Ok(out)
}

/// Magnitude-weighted mean frequency per frame in Hz; silent frames give 0.
pub fn spectral_centroid(grid: &StftFrameGrid) -> FeatureMatrix {
    let mut out = FeatureMatrix::zeros(FeatureKind::Centroid, 1, grid.n_frames());
    for (t, frame) in grid.frames.iter().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for (b, c) in frame.iter().enumerate() {
            let m = c.norm();
            num += grid.bin_hz(b) * m;
            den += m;
        }
        out.set(0, t, if den > 0.0 { num / den } else { 0.0 });
    }
    out
}
