use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{
    assemble_map, chromagram, mel_spectrogram, mfcc, spectral_centroid, spectral_contrast, stft,
    tonnetz, FeatureError, FeatureKind, FeatureMap, FeatureMatrix, CONTRAST_FMIN,
};
use crate::signal::{normalize_length, resample, AudioClip};

/// An ordered list of one to three feature kinds, one per map channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Recipe {
    kinds: Vec<FeatureKind>,
}

impl Recipe {
    /// The predefined recipes: three single-feature, three paired and three
    /// three-channel combinations.
    pub const NAMED: [&'static str; 9] = [
        "mel",
        "mfcc",
        "chroma",
        "mel+mfcc",
        "mel+chroma",
        "mfcc+chroma",
        "mel+mfcc+chroma",
        "mel+chroma+contrast",
        "mfcc+contrast+tonnetz",
    ];

    pub fn new(kinds: Vec<FeatureKind>) -> Result<Self, FeatureError> {
        if kinds.is_empty() || kinds.len() > super::MAX_CHANNELS {
            return Err(FeatureError::TooManyChannels(kinds.len()));
        }
        for (i, k) in kinds.iter().enumerate() {
            if kinds[..i].contains(k) {
                return Err(FeatureError::InvalidParams {
                    field: "recipe",
                    reason: "feature listed twice",
                });
            }
        }
        Ok(Self { kinds })
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn named() -> Vec<Recipe> {
        Self::NAMED.iter().map(|n| n.parse().expect("named recipe")).collect()
    }
}

impl Default for Recipe {
    fn default() -> Self {
        Self {
            kinds: alloc::vec![FeatureKind::Mel, FeatureKind::Mfcc, FeatureKind::Chroma],
        }
    }
}

impl FromStr for Recipe {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kinds = s
            .split('+')
            .map(|part| {
                FeatureKind::from_name(part.trim()).ok_or_else(|| FeatureError::UnknownRecipe(s.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(kinds)
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.kinds.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            f.write_str(k.name())?;
        }
        Ok(())
    }
}

/// Settings for turning a clip into a feature map.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    pub sample_rate: u32,
    pub duration_s: f64,
    pub n_fft: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub fmin: f64,
    /// Upper mel edge; `None` means Nyquist.
    pub fmax: Option<f64>,
    pub n_mfcc: usize,
    pub tuning_ref: f64,
    pub contrast_bands: usize,
    pub contrast_fmin: f64,
    pub map_height: usize,
    pub map_width: usize,
    pub recipe: Recipe,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            sample_rate: 88_200,
            duration_s: 2.9,
            n_fft: 2048,
            hop: 256,
            n_mels: 128,
            fmin: 0.0,
            fmax: None,
            n_mfcc: 40,
            tuning_ref: 440.0,
            contrast_bands: 6,
            contrast_fmin: CONTRAST_FMIN,
            map_height: 128,
            map_width: 128,
            recipe: Recipe::default(),
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |field, reason| Err(FeatureError::InvalidParams { field, reason });
        if self.sample_rate == 0 {
            return bad("sample_rate", "must be positive");
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad("duration_s", "must be positive");
        }
        if self.n_fft < 2 {
            return bad("n_fft", "must be at least 2");
        }
        if self.hop == 0 {
            return bad("hop", "must be at least 1");
        }
        if self.n_mels == 0 {
            return bad("n_mels", "must be at least 1");
        }
        if self.n_mfcc == 0 || self.n_mfcc > self.n_mels {
            return bad("n_mfcc", "must be between 1 and n_mels");
        }
        if !(self.tuning_ref > 0.0 && self.tuning_ref.is_finite()) {
            return bad("tuning_ref", "must be positive");
        }
        if self.contrast_bands == 0 {
            return bad("contrast_bands", "must be at least 1");
        }
        if self.map_height == 0 || self.map_width == 0 {
            return bad("map_size", "must be positive");
        }
        let nyquist = self.sample_rate as f64 / 2.0;
        let fmax = self.fmax.unwrap_or(nyquist);
        if !(self.fmin >= 0.0 && self.fmin < fmax && fmax <= nyquist) {
            return Err(FeatureError::BadBandEdges {
                fmin: self.fmin,
                fmax,
                nyquist,
            });
        }
        Ok(())
    }

    /// Resample to the configured rate and fix the length.
    pub fn prepare(&self, clip: &AudioClip) -> Result<AudioClip, FeatureError> {
        let clip = if clip.sample_rate == self.sample_rate {
            clip.clone()
        } else {
            resample(clip, self.sample_rate)?
        };
        Ok(normalize_length(&clip, self.duration_s)?)
    }

    /// Feature matrices of an already prepared clip, in recipe order.
    pub fn features(&self, clip: &AudioClip) -> Result<Vec<FeatureMatrix>, FeatureError> {
        self.validate()?;
        let grid = stft(&clip.samples, clip.sample_rate, self.n_fft, self.hop)?;
        let fmax = self.fmax.unwrap_or(grid.nyquist());
        let kinds = self.recipe.kinds();
        let need = |k: FeatureKind| kinds.contains(&k);
        let mel = if need(FeatureKind::Mel) || need(FeatureKind::Mfcc) {
            Some(mel_spectrogram(&grid, self.n_mels, self.fmin, fmax)?)
        } else {
            None
        };
        let chroma = if need(FeatureKind::Chroma) || need(FeatureKind::Tonnetz) {
            Some(chromagram(&grid, self.tuning_ref)?)
        } else {
            None
        };
        kinds
            .iter()
            .map(|k| match k {
                FeatureKind::Mel => Ok(mel.clone().expect("mel computed")),
                FeatureKind::Mfcc => mfcc(mel.as_ref().expect("mel computed"), self.n_mfcc),
                FeatureKind::Chroma => Ok(chroma.clone().expect("chroma computed")),
                FeatureKind::Tonnetz => tonnetz(chroma.as_ref().expect("chroma computed")),
                FeatureKind::Contrast => {
                    spectral_contrast(&grid, self.contrast_bands, self.contrast_fmin)
                }
                FeatureKind::Centroid => Ok(spectral_centroid(&grid)),
            })
            .collect()
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.recipe.kinds().iter().map(|k| k.name().to_string()).collect()
    }
}

/// Full extraction: prepare the clip, compute the recipe's features, assemble the map.
pub fn extract_map(clip: &AudioClip, config: &ExtractConfig) -> Result<FeatureMap, FeatureError> {
    config.validate()?;
    let prepared = config.prepare(clip)?;
    let feats = config.features(&prepared)?;
    assemble_map(&feats, config.map_height, config.map_width)
}
