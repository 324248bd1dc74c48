//! Synthetic three-class chirp corpus for demos and end-to-end checks.
//!
//! Each clip is white Gaussian noise with one short linear chirp in a window
//! around the middle of the clip: rising, falling or flat depending on the
//! class. Onset and center frequency are jittered per clip.

use std::f64::consts::PI;

use optivmd_core::dataset::LabeledDataset;
use optivmd_core::features::FeatureError;
use optivmd_core::{extract_map, AudioClip, ExtractConfig, FeatureKind, Recipe};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const CLASS_NAMES: [&str; 3] = ["rising", "falling", "flat"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpSpec {
    pub sample_rate: u32,
    pub duration_s: f64,
    pub per_class: usize,
    /// Standard deviation of the additive noise.
    pub sigma: f64,
    pub amplitude: f64,
    /// Chirp length in seconds.
    pub chirp_s: f64,
    /// Sweep width in Hz for the rising and falling classes.
    pub sweep_hz: f64,
    pub center_hz: f64,
    /// Maximum onset shift in seconds and center shift in Hz.
    pub jitter_s: f64,
    pub jitter_hz: f64,
    pub seed: u64,
}

impl Default for ChirpSpec {
    fn default() -> Self {
        Self {
            sample_rate: 8000,
            duration_s: 0.5,
            per_class: 20,
            sigma: 0.3,
            amplitude: 0.5,
            chirp_s: 0.15,
            sweep_hz: 800.0,
            center_hz: 1200.0,
            jitter_s: 0.02,
            jitter_hz: 100.0,
            seed: 0,
        }
    }
}

/// Clips ordered class by class, with their class indices.
pub fn chirp_clips(spec: &ChirpSpec) -> Vec<(AudioClip, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.sigma.max(0.0)).expect("finite sigma");
    let sr = spec.sample_rate as f64;
    let n = (spec.duration_s * sr).round() as usize;
    let mut out = Vec::with_capacity(3 * spec.per_class);
    for class in 0..3 {
        for i in 0..spec.per_class {
            let onset = (spec.duration_s - spec.chirp_s) / 2.0 + spec.jitter_s * (2.0 * rng.random::<f64>() - 1.0);
            let center = spec.center_hz + spec.jitter_hz * (2.0 * rng.random::<f64>() - 1.0);
            let sweep = match class {
                0 => spec.sweep_hz,
                1 => -spec.sweep_hz,
                _ => 0.0,
            };
            let f0 = center - sweep / 2.0;
            let rate = sweep / spec.chirp_s;
            let samples = (0..n)
                .map(|j| {
                    let t = j as f64 / sr - onset;
                    let tone = if (0.0..spec.chirp_s).contains(&t) {
                        let env = (PI * t / spec.chirp_s).sin();
                        spec.amplitude * env * (2.0 * PI * (f0 * t + 0.5 * rate * t * t)).sin()
                    } else {
                        0.0
                    };
                    tone + noise.sample(&mut rng)
                })
                .collect();
            let clip = AudioClip::new(samples, spec.sample_rate, format!("{}_{i:03}", CLASS_NAMES[class]))
                .expect("non-empty clip");
            out.push((clip, class));
        }
    }
    out
}

/// Extraction settings sized for the synthetic clips: one mel channel, 64 x 64.
pub fn small_extract_config(spec: &ChirpSpec) -> ExtractConfig {
    ExtractConfig {
        sample_rate: spec.sample_rate,
        duration_s: spec.duration_s,
        n_fft: 256,
        hop: 64,
        n_mels: 64,
        n_mfcc: 20,
        map_height: 64,
        map_width: 64,
        recipe: Recipe::new(vec![FeatureKind::Mel]).expect("one channel"),
        ..ExtractConfig::default()
    }
}

pub fn chirp_dataset(spec: &ChirpSpec, extract: &ExtractConfig) -> Result<LabeledDataset, FeatureError> {
    let clips = chirp_clips(spec);
    let maps = clips
        .iter()
        .map(|(clip, _)| extract_map(clip, extract))
        .collect::<Result<Vec<_>, _>>()?;
    let labels = clips.iter().map(|(_, c)| *c).collect();
    let names = CLASS_NAMES.iter().map(|s| s.to_string()).collect();
    Ok(LabeledDataset::new(maps, labels, names).expect("consistent synthetic dataset"))
}
