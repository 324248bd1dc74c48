use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FeatureError, FeatureKind, FeatureMatrix, StftFrameGrid};
use crate::math::{cos, log10, powf, sqrt};

/// Lower clamp of dB values relative to the map maximum.
pub const DB_FLOOR: f64 = -80.0;

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * log10(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (powf(10.0, mel / 2595.0) - 1.0)
}

/// Triangular filters, equally spaced on the mel scale, peak weight 1 (no area
/// normalization). Returns `(weights, centers_hz)`; `weights` is
/// `n_mels x (n_fft/2 + 1)` row-major.
pub fn mel_filterbank(
    n_mels: usize,
    n_fft: usize,
    sample_rate: u32,
    fmin: f64,
    fmax: f64,
) -> Result<(Vec<f64>, Vec<f64>), FeatureError> {
    let nyquist = sample_rate as f64 / 2.0;
    if !(fmin >= 0.0 && fmin < fmax && fmax <= nyquist) {
        return Err(FeatureError::BadBandEdges {
            fmin,
            fmax,
            nyquist,
        });
    }
    if n_mels == 0 {
        return Err(FeatureError::InvalidParams {
            field: "n_mels",
            reason: "must be at least 1",
        });
    }
    let (lo, hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let n_bins = n_fft / 2 + 1;
    let mut weights = vec![0.0; n_mels * n_bins];
    for m in 0..n_mels {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        for b in 0..n_bins {
            let f = b as f64 * sample_rate as f64 / n_fft as f64;
            let w = if f > left && f <= center {
                (f - left) / (center - left)
            } else if f > center && f < right {
                (right - f) / (right - center)
            } else {
                0.0
            };
            weights[m * n_bins + b] = w;
        }
    }
    Ok((weights, edges[1..=n_mels].to_vec()))
}

/// Power spectrum `|X|^2` projected through the mel filterbank (linear power, >= 0).
pub fn mel_power(
    grid: &StftFrameGrid,
    n_mels: usize,
    fmin: f64,
    fmax: f64,
) -> Result<FeatureMatrix, FeatureError> {
    let (weights, _) = mel_filterbank(n_mels, grid.n_fft, grid.sample_rate, fmin, fmax)?;
    let n_bins = grid.n_bins();
    let t_len = grid.n_frames();
    let mut out = FeatureMatrix::zeros(FeatureKind::Mel, n_mels, t_len);
    // skip the zero stretches of each triangle
    let spans: Vec<(usize, usize)> = (0..n_mels)
        .map(|m| {
            let row = &weights[m * n_bins..(m + 1) * n_bins];
            let first = row.iter().position(|&w| w > 0.0).unwrap_or(0);
            let last = row.iter().rposition(|&w| w > 0.0).map_or(0, |i| i + 1);
            (first, last.max(first))
        })
        .collect();
    for (t, frame) in grid.frames.iter().enumerate() {
        let power: Vec<f64> = frame.iter().map(|c| c.norm_sqr()).collect();
        for (m, &(a, b)) in spans.iter().enumerate() {
            let row = &weights[m * n_bins..(m + 1) * n_bins];
            let acc: f64 = (a..b).map(|i| row[i] * power[i]).sum();
            out.set(m, t, acc);
        }
    }
    Ok(out)
}

/// `10 log10(p / max)` over the whole matrix, clamped below at [`DB_FLOOR`].
pub fn power_to_db(power: &FeatureMatrix) -> FeatureMatrix {
    let max = power.values.iter().copied().fold(0.0f64, f64::max);
    let values = power
        .values
        .iter()
        .map(|&p| {
            if max <= 0.0 || p <= 0.0 {
                DB_FLOOR
            } else {
                (10.0 * log10(p / max)).max(DB_FLOOR)
            }
        })
        .collect();
    FeatureMatrix::new(power.kind, power.rows, power.cols, values)
}

/// Mel spectrogram in dB relative to its maximum, floored at -80 dB.
pub fn mel_spectrogram(
    grid: &StftFrameGrid,
    n_mels: usize,
    fmin: f64,
    fmax: f64,
) -> Result<FeatureMatrix, FeatureError> {
    Ok(power_to_db(&mel_power(grid, n_mels, fmin, fmax)?))
}

fn dct_scale(k: usize, n: usize) -> f64 {
    if k == 0 {
        sqrt(1.0 / n as f64)
    } else {
        sqrt(2.0 / n as f64)
    }
}

/// Orthonormal DCT-II.
pub fn dct_ii_ortho(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(m, v)| v * cos(PI * k as f64 * (m as f64 + 0.5) / n as f64))
                .sum();
            s * dct_scale(k, n)
        })
        .collect()
}

/// Orthonormal DCT-III, the inverse of [`dct_ii_ortho`].
pub fn dct_iii_ortho(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    (0..n)
        .map(|m| {
            c.iter()
                .enumerate()
                .map(|(k, v)| v * dct_scale(k, n) * cos(PI * k as f64 * (m as f64 + 0.5) / n as f64))
                .sum()
        })
        .collect()
}

/// First `n_mfcc` orthonormal DCT-II coefficients of each dB mel column.
pub fn mfcc(mel: &FeatureMatrix, n_mfcc: usize) -> Result<FeatureMatrix, FeatureError> {
    mel.expect_kind(FeatureKind::Mel)?;
    let n = mel.rows;
    if n_mfcc == 0 || n_mfcc > n {
        return Err(FeatureError::InvalidParams {
            field: "n_mfcc",
            reason: "must be between 1 and n_mels",
        });
    }
    let table: Vec<f64> = (0..n_mfcc)
        .flat_map(|k| {
            (0..n).map(move |m| dct_scale(k, n) * cos(PI * k as f64 * (m as f64 + 0.5) / n as f64))
        })
        .collect();
    let mut out = FeatureMatrix::zeros(FeatureKind::Mfcc, n_mfcc, mel.cols);
    let mut col = vec![0.0; n];
    for t in 0..mel.cols {
        for (m, c) in col.iter_mut().enumerate() {
            *c = mel.get(m, t);
        }
        for k in 0..n_mfcc {
            let row = &table[k * n..(k + 1) * n];
            out.set(k, t, row.iter().zip(&col).map(|(a, b)| a * b).sum());
        }
    }
    Ok(out)
}
