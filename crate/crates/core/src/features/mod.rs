//! Time-frequency features and their assembly into fixed-shape maps.
//!
//! Everything is computed from one Hann-windowed STFT grid: mel power in dB,
//! MFCC (orthonormal DCT-II of the dB mel), chroma, tonnetz, spectral contrast
//! and spectral centroid. [`assemble_map`] resizes up to three feature
//! matrices to `H x W` and stacks them as channels of a [`FeatureMap`].

mod chroma;
mod contrast;
mod map;
mod mel;
mod pipeline;
mod stft;

use alloc::vec::Vec;
use core::fmt;

pub use chroma::{chromagram, pitch_class, tonnetz, tonnetz_basis, tonnetz_projection, TONNETZ_ANGLES, TONNETZ_RADII};
pub use contrast::{band_contrast, spectral_centroid, spectral_contrast, CONTRAST_FMIN, CONTRAST_QUANTILE};
pub use map::{assemble_map, resize_bilinear, FeatureMap, MAX_CHANNELS};
pub use mel::{dct_ii_ortho, dct_iii_ortho, hz_to_mel, mel_filterbank, mel_power, mel_spectrogram, mel_to_hz, mfcc, power_to_db, DB_FLOOR};
pub use pipeline::{extract_map, ExtractConfig, Recipe};
pub use stft::{stft, StftFrameGrid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("signal of length {len} is shorter than the frame size {n_fft}")]
    SignalTooShort { len: usize, n_fft: usize },
    #[error("invalid parameter {field}: {reason}")]
    InvalidParams {
        field: &'static str,
        reason: &'static str,
    },
    #[error("band edges out of range: fmin {fmin} Hz, fmax {fmax} Hz, nyquist {nyquist} Hz")]
    BadBandEdges { fmin: f64, fmax: f64, nyquist: f64 },
    #[error("expected a {expected} matrix, got {got}")]
    WrongKind { expected: FeatureKind, got: FeatureKind },
    #[error("a feature map holds 1 to 3 channels, got {0}")]
    TooManyChannels(usize),
    #[error("unknown feature recipe {0:?}")]
    UnknownRecipe(alloc::string::String),
    #[error(transparent)]
    Signal(#[from] crate::signal::SignalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FeatureKind {
    Mel,
    Mfcc,
    Chroma,
    Tonnetz,
    Contrast,
    Centroid,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 6] = [
        FeatureKind::Mel,
        FeatureKind::Mfcc,
        FeatureKind::Chroma,
        FeatureKind::Tonnetz,
        FeatureKind::Contrast,
        FeatureKind::Centroid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Mel => "mel",
            FeatureKind::Mfcc => "mfcc",
            FeatureKind::Chroma => "chroma",
            FeatureKind::Tonnetz => "tonnetz",
            FeatureKind::Contrast => "contrast",
            FeatureKind::Centroid => "centroid",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A real `rows x cols` matrix (features x frames), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub kind: FeatureKind,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(kind: FeatureKind, rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "feature matrix size mismatch");
        Self {
            kind,
            rows,
            cols,
            values,
        }
    }

    pub fn zeros(kind: FeatureKind, rows: usize, cols: usize) -> Self {
        Self::new(kind, rows, cols, alloc::vec![0.0; rows * cols])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.cols + col] = v;
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub(crate) fn expect_kind(&self, expected: FeatureKind) -> Result<(), FeatureError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(FeatureError::WrongKind {
                expected,
                got: self.kind,
            })
        }
    }
}
