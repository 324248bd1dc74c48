use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FeatureError, FeatureKind, FeatureMatrix, StftFrameGrid};
use crate::math::{cos, log2, round, sin};

/// Radii of the fifths, minor-thirds and major-thirds circles.
pub const TONNETZ_RADII: [f64; 3] = [1.0, 1.0, 0.5];
/// Angle per pitch class on each circle.
pub const TONNETZ_ANGLES: [f64; 3] = [7.0 * PI / 6.0, 3.0 * PI / 2.0, 2.0 * PI / 3.0];

/// Pitch class of `hz` relative to `tuning_ref` (class 0 is the reference note, A at 440).
pub fn pitch_class(hz: f64, tuning_ref: f64) -> usize {
    let semis = round(12.0 * log2(hz / tuning_ref)) as i64;
    semis.rem_euclid(12) as usize
}

/// 12 x T pitch-class magnitude profile, each column scaled to max 1.
pub fn chromagram(grid: &StftFrameGrid, tuning_ref: f64) -> Result<FeatureMatrix, FeatureError> {
    if !(tuning_ref > 0.0 && tuning_ref.is_finite()) {
        return Err(FeatureError::InvalidParams {
            field: "tuning_ref",
            reason: "must be positive",
        });
    }
    // DC has no pitch
    let classes: Vec<usize> = (1..grid.n_bins())
        .map(|b| pitch_class(grid.bin_hz(b), tuning_ref))
        .collect();
    let mut out = FeatureMatrix::zeros(FeatureKind::Chroma, 12, grid.n_frames());
    for (t, frame) in grid.frames.iter().enumerate() {
        let mut acc = [0.0f64; 12];
        for (c, bin) in classes.iter().zip(&frame[1..]) {
            acc[*c] += bin.norm();
        }
        let max = acc.iter().copied().fold(0.0, f64::max);
        for (p, v) in acc.iter().enumerate() {
            out.set(p, t, if max > 0.0 { v / max } else { 0.0 });
        }
    }
    Ok(out)
}

/// The 6 x 12 tonal-centroid basis: rows are (sin, cos) pairs for fifths,
/// minor thirds and major thirds.
pub fn tonnetz_basis() -> [[f64; 12]; 6] {
    let mut basis = [[0.0; 12]; 6];
    for (circle, (&r, &angle)) in TONNETZ_RADII.iter().zip(&TONNETZ_ANGLES).enumerate() {
        for p in 0..12 {
            let theta = p as f64 * angle;
            basis[2 * circle][p] = r * sin(theta);
            basis[2 * circle + 1][p] = r * cos(theta);
        }
    }
    basis
}

/// Basis projection of one chroma column, without normalization.
pub fn tonnetz_projection(chroma: &[f64; 12]) -> [f64; 6] {
    let basis = tonnetz_basis();
    let mut out = [0.0; 6];
    for (o, row) in out.iter_mut().zip(&basis) {
        *o = row.iter().zip(chroma).map(|(a, b)| a * b).sum();
    }
    out
}

/// 6 x T tonnetz of L1-normalized chroma columns; zero columns map to zero.
pub fn tonnetz(chroma: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
    chroma.expect_kind(FeatureKind::Chroma)?;
    let mut out = FeatureMatrix::zeros(FeatureKind::Tonnetz, 6, chroma.cols);
    for t in 0..chroma.cols {
        let mut col = [0.0; 12];
        for (p, c) in col.iter_mut().enumerate() {
            *c = chroma.get(p, t);
        }
        let l1: f64 = col.iter().map(|v| v.abs()).sum();
        if l1 == 0.0 {
            continue;
        }
        col.iter_mut().for_each(|v| *v /= l1);
        for (r, v) in tonnetz_projection(&col).into_iter().enumerate() {
            out.set(r, t, v);
        }
    }
    Ok(out)
}
