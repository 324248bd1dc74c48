//! Feature-map augmentation by row-wise VMD, and waveform denoising.
//!
//! Every length-`W` row of every channel is decomposed with noise slack
//! (`tau = 0`) and replaced by the sum of its modes; the Wiener remainder is
//! dropped. Each channel is then min-max scaled back onto `[0, 1]`.

use alloc::vec::Vec;

use crate::features::FeatureMap;
use crate::signal::AudioClip;
use crate::vmd::{decompose, VmdError, VmdParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AugmentError {
    #[error("map rows of width {width} are too short for {k} modes")]
    RowTooShort { width: usize, k: usize },
    #[error(transparent)]
    Vmd(#[from] VmdError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AugmentParams {
    pub k: usize,
    pub alpha: f64,
    pub tau: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl AugmentParams {
    pub fn new(k: usize, alpha: f64) -> Self {
        let d = VmdParams::default();
        Self {
            k,
            alpha,
            tau: 0.0,
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }

    pub fn vmd(&self) -> VmdParams {
        VmdParams::new(self.k, self.alpha)
            .with_tau(self.tau)
            .with_tol(self.tol)
            .with_max_iter(self.max_iter)
    }
}

/// Sum of the modes of one series.
pub fn smooth_series(series: &[f64], params: &VmdParams) -> Result<Vec<f64>, VmdError> {
    Ok(decompose(series, params)?.mode_sum())
}

/// Decompose each row along the time (width) axis and keep the mode sum.
pub fn augment_map(map: &FeatureMap, params: &AugmentParams) -> Result<FeatureMap, AugmentError> {
    if map.width < 2 * params.k.max(1) {
        return Err(AugmentError::RowTooShort {
            width: map.width,
            k: params.k,
        });
    }
    let vmd = params.vmd();
    vmd.validate()?;
    let mut out = map.clone();
    let mut row = alloc::vec![0.0f64; map.width];
    for c in 0..map.channels {
        let mut channel = Vec::with_capacity(map.height * map.width);
        for h in 0..map.height {
            for (w, v) in row.iter_mut().enumerate() {
                *v = map.get(h, w, c) as f64;
            }
            channel.extend(smooth_series(&row, &vmd)?);
        }
        out.set_channel_scaled(c, &channel);
    }
    Ok(out)
}

/// Replace a clip's samples with the sum of its modes (waveform-level variant).
pub fn denoise_clip(clip: &AudioClip, params: &AugmentParams) -> Result<AudioClip, AugmentError> {
    if clip.len() < 2 * params.k.max(1) {
        return Err(AugmentError::RowTooShort {
            width: clip.len(),
            k: params.k,
        });
    }
    let samples = smooth_series(&clip.samples, &params.vmd())?;
    Ok(AudioClip {
        samples,
        sample_rate: clip.sample_rate,
        source_id: clip.source_id.clone(),
    })
}
