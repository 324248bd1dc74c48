use alloc::vec::Vec;

use num_complex::Complex64;

use super::FeatureError;
use crate::fft::Fft;
use crate::math::hann_periodic;

/// One-sided STFT: `frames[t][b]` for `b` in `0..=n_fft/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StftFrameGrid {
    pub frames: Vec<Vec<Complex64>>,
    pub n_fft: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl StftFrameGrid {
    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    /// Center frequency of bin `b` in Hz.
    pub fn bin_hz(&self, b: usize) -> f64 {
        b as f64 * self.sample_rate as f64 / self.n_fft as f64
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }

    pub fn magnitudes(&self, t: usize) -> Vec<f64> {
        self.frames[t].iter().map(|c| c.norm()).collect()
    }
}

/// Hann-windowed STFT without padding: `1 + (N - n_fft) / hop` frames.
pub fn stft(
    samples: &[f64],
    sample_rate: u32,
    n_fft: usize,
    hop: usize,
) -> Result<StftFrameGrid, FeatureError> {
    if n_fft < 2 {
        return Err(FeatureError::InvalidParams {
            field: "n_fft",
            reason: "must be at least 2",
        });
    }
    if hop == 0 {
        return Err(FeatureError::InvalidParams {
            field: "hop",
            reason: "must be at least 1",
        });
    }
    if sample_rate == 0 {
        return Err(crate::signal::SignalError::ZeroSampleRate.into());
    }
    if samples.len() < n_fft {
        return Err(FeatureError::SignalTooShort {
            len: samples.len(),
            n_fft,
        });
    }
    let window = hann_periodic(n_fft);
    let fft = Fft::new(n_fft);
    let n_frames = 1 + (samples.len() - n_fft) / hop;
    let mut buf = alloc::vec![Complex64::new(0.0, 0.0); n_fft];
    let frames = (0..n_frames)
        .map(|t| {
            let start = t * hop;
            for ((b, x), w) in buf.iter_mut().zip(&samples[start..start + n_fft]).zip(&window) {
                *b = Complex64::new(x * w, 0.0);
            }
            fft.forward(&mut buf);
            buf[..=n_fft / 2].to_vec()
        })
        .collect();
    Ok(StftFrameGrid {
        frames,
        n_fft,
        hop,
        sample_rate,
    })
}
