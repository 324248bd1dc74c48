//! Audio clips, band-limited resampling, fixed-length normalization and
//! corpus filename labels.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::math::{bessel_i0, round, sinc, sqrt};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum SignalError {
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("clip has no samples")]
    EmptyClip,
    #[error("duration must be positive and finite")]
    BadDuration,
    #[error("filename {0:?} does not match the naming convention")]
    UnrecognizedPattern(String),
    #[error("unknown emotion code {code:?} in {filename:?}")]
    UnknownEmotionCode { filename: String, code: String },
}

/// A mono clip: samples in nominal range [-1, 1] at `sample_rate` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_id: String,
}

impl AudioClip {
    pub fn new(
        samples: Vec<f64>,
        sample_rate: u32,
        source_id: impl Into<String>,
    ) -> Result<Self, SignalError> {
        if sample_rate == 0 {
            return Err(SignalError::ZeroSampleRate);
        }
        if samples.is_empty() {
            return Err(SignalError::EmptyClip);
        }
        Ok(Self {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Taps per polyphase branch.
pub const RESAMPLE_TAPS: usize = 64;
/// Kaiser window shape parameter of the interpolation kernel.
pub const KAISER_BETA: f64 = 8.6;
/// Above this many phases the kernel is evaluated on the fly instead of tabulated.
const MAX_TABULATED_PHASES: u64 = 4096;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Output length `round(n * to / from)` in exact integer arithmetic.
pub fn resampled_len(n: usize, from: u32, to: u32) -> usize {
    let num = n as u128 * to as u128;
    let den = from as u128;
    ((2 * num + den) / (2 * den)) as usize
}

struct Kernel {
    cutoff: f64,
    i0_beta: f64,
}

impl Kernel {
    /// Taps for an output sample sitting `frac` input samples past its base index,
    /// normalized to unit DC gain.
    fn taps(&self, frac: f64) -> [f64; RESAMPLE_TAPS] {
        let half = (RESAMPLE_TAPS / 2) as f64;
        let mut taps = [0.0; RESAMPLE_TAPS];
        let mut sum = 0.0;
        for (j, tap) in taps.iter_mut().enumerate() {
            // input offsets run from -(half - 1) to +half relative to the base index
            let x = (j as f64 - (half - 1.0)) - frac;
            let u = x / half;
            let window = if u.abs() >= 1.0 {
                0.0
            } else {
                bessel_i0(KAISER_BETA * sqrt(1.0 - u * u)) / self.i0_beta
            };
            *tap = self.cutoff * sinc(self.cutoff * x) * window;
            sum += *tap;
        }
        if sum != 0.0 {
            for tap in taps.iter_mut() {
                *tap /= sum;
            }
        }
        taps
    }
}

/// Polyphase windowed-sinc resampling (Kaiser window, 64 taps per phase).
///
/// Edges are extended by repeating the first/last sample, so constant signals
/// stay constant everywhere. `target_rate == sample_rate` returns the clip as is.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip, SignalError> {
    if target_rate == 0 {
        return Err(SignalError::ZeroSampleRate);
    }
    if target_rate == clip.sample_rate {
        return Ok(clip.clone());
    }
    let from = clip.sample_rate as u64;
    let to = target_rate as u64;
    let g = gcd(from, to);
    // output n sits at input position n * step / phases
    let phases = to / g;
    let step = from / g;
    let kernel = Kernel {
        cutoff: (to as f64 / from as f64).min(1.0),
        i0_beta: bessel_i0(KAISER_BETA),
    };
    let table: Option<Vec<[f64; RESAMPLE_TAPS]>> = (phases <= MAX_TABULATED_PHASES).then(|| {
        (0..phases)
            .map(|p| kernel.taps(p as f64 / phases as f64))
            .collect()
    });

    let input = &clip.samples;
    let last = input.len() as i64 - 1;
    let at = |i: i64| input[i.clamp(0, last) as usize];
    let out_len = resampled_len(input.len(), clip.sample_rate, target_rate);
    let mut out = Vec::with_capacity(out_len);
    let offset = (RESAMPLE_TAPS / 2) as i64 - 1;
    for n in 0..out_len as u64 {
        let pos = n * step;
        let base = (pos / phases) as i64;
        let phase = pos % phases;
        let computed;
        let taps = match &table {
            Some(t) => &t[phase as usize],
            None => {
                computed = kernel.taps(phase as f64 / phases as f64);
                &computed
            }
        };
        let mut acc = 0.0;
        for (j, &tap) in taps.iter().enumerate() {
            acc += tap * at(base - offset + j as i64);
        }
        out.push(acc);
    }
    Ok(AudioClip {
        samples: out,
        sample_rate: target_rate,
        source_id: clip.source_id.clone(),
    })
}

/// Number of samples for `duration_s` at `sample_rate`.
pub fn target_len(duration_s: f64, sample_rate: u32) -> usize {
    round(duration_s * sample_rate as f64) as usize
}

/// Center-crop or symmetrically zero-pad to `round(duration_s * sample_rate)` samples.
///
/// When the difference is odd the extra sample is cropped from / padded at the end.
pub fn normalize_length(clip: &AudioClip, duration_s: f64) -> Result<AudioClip, SignalError> {
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(SignalError::BadDuration);
    }
    let target = target_len(duration_s, clip.sample_rate);
    let n = clip.samples.len();
    let samples = if n >= target {
        let start = (n - target) / 2;
        clip.samples[start..start + target].to_vec()
    } else {
        let before = (target - n) / 2;
        let mut padded = alloc::vec![0.0; target];
        padded[before..before + n].copy_from_slice(&clip.samples);
        padded
    };
    Ok(AudioClip {
        samples,
        sample_rate: clip.sample_rate,
        source_id: clip.source_id.clone(),
    })
}

/// Emotion categories across the supported corpora.
///
/// The first seven are the EMO-DB taxonomy; `Calm` and `Surprised` only occur
/// in RAVDESS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Emotion {
    Anger,
    Boredom,
    Disgust,
    Fear,
    Happiness,
    Neutral,
    Sadness,
    Calm,
    Surprised,
}

impl Emotion {
    pub const ALL: [Emotion; 9] = [
        Emotion::Anger,
        Emotion::Boredom,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Happiness,
        Emotion::Neutral,
        Emotion::Sadness,
        Emotion::Calm,
        Emotion::Surprised,
    ];

    /// The seven classes shared by both corpora's primary setup.
    pub const SEVEN: [Emotion; 7] = [
        Emotion::Anger,
        Emotion::Boredom,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Happiness,
        Emotion::Neutral,
        Emotion::Sadness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Boredom => "boredom",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Happiness => "happiness",
            Emotion::Neutral => "neutral",
            Emotion::Sadness => "sadness",
            Emotion::Calm => "calm",
            Emotion::Surprised => "surprised",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Position in [`Emotion::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn in_seven_class_setup(self) -> bool {
        !matches!(self, Emotion::Calm | Emotion::Surprised)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Integer class with its name, as stored alongside a dataset's class table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmotionLabel {
    pub class_index: usize,
    pub class_name: String,
}

impl From<Emotion> for EmotionLabel {
    fn from(e: Emotion) -> Self {
        Self {
            class_index: e.index(),
            class_name: e.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Convention {
    /// Berlin EMO-DB: `03a01Wa.wav`, emotion letter at position 6.
    Emodb,
    /// RAVDESS: `03-01-06-01-02-01-12.wav`, emotion in the third field.
    Ravdess,
}

impl core::str::FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "emodb" => Ok(Convention::Emodb),
            "ravdess" => Ok(Convention::Ravdess),
            other => Err(alloc::format!("unknown corpus convention {other:?}")),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Emodb => "emodb",
            Convention::Ravdess => "ravdess",
        })
    }
}

pub fn emodb_code(code: char) -> Option<Emotion> {
    Some(match code {
        'W' => Emotion::Anger,
        'L' => Emotion::Boredom,
        'E' => Emotion::Disgust,
        'A' => Emotion::Fear,
        'F' => Emotion::Happiness,
        'T' => Emotion::Sadness,
        'N' => Emotion::Neutral,
        _ => return None,
    })
}

pub fn ravdess_code(code: &str) -> Option<Emotion> {
    Some(match code {
        "01" => Emotion::Neutral,
        "02" => Emotion::Calm,
        "03" => Emotion::Happiness,
        "04" => Emotion::Sadness,
        "05" => Emotion::Anger,
        "06" => Emotion::Fear,
        "07" => Emotion::Disgust,
        "08" => Emotion::Surprised,
        _ => return None,
    })
}

fn strip_wav(filename: &str) -> &str {
    let base = filename.rsplit(['/', '\\']).next().unwrap_or(filename);
    match base.len().checked_sub(4) {
        Some(cut) if base.is_char_boundary(cut) && base[cut..].eq_ignore_ascii_case(".wav") => {
            &base[..cut]
        }
        _ => base,
    }
}

/// Derive the emotion of a corpus file from its name.
pub fn parse_label(filename: &str, convention: Convention) -> Result<Emotion, SignalError> {
    let stem = strip_wav(filename);
    let unrecognized = || SignalError::UnrecognizedPattern(filename.to_string());
    match convention {
        Convention::Emodb => {
            // two-digit speaker, text code (letter + two digits), emotion letter, version letter
            let b = stem.as_bytes();
            let ok = b.len() == 7
                && b[0].is_ascii_digit()
                && b[1].is_ascii_digit()
                && b[2].is_ascii_lowercase()
                && b[3].is_ascii_digit()
                && b[4].is_ascii_digit()
                && b[5].is_ascii_uppercase()
                && b[6].is_ascii_lowercase();
            if !ok {
                return Err(unrecognized());
            }
            let code = b[5] as char;
            emodb_code(code).ok_or_else(|| SignalError::UnknownEmotionCode {
                filename: filename.to_string(),
                code: code.to_string(),
            })
        }
        Convention::Ravdess => {
            let fields: Vec<&str> = stem.split('-').collect();
            let ok = fields.len() == 7
                && fields
                    .iter()
                    .all(|f| f.len() == 2 && f.bytes().all(|c| c.is_ascii_digit()));
            if !ok {
                return Err(unrecognized());
            }
            ravdess_code(fields[2]).ok_or_else(|| SignalError::UnknownEmotionCode {
                filename: filename.to_string(),
                code: fields[2].to_string(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn clip(samples: Vec<f64>, rate: u32) -> AudioClip {
        AudioClip::new(samples, rate, "t").unwrap()
    }

    #[test]
    fn rejects_degenerate_clips() {
        assert_eq!(AudioClip::new(vec![], 8000, "x"), Err(SignalError::EmptyClip));
        assert_eq!(AudioClip::new(vec![0.0], 0, "x"), Err(SignalError::ZeroSampleRate));
    }

    #[test]
    fn resample_preserves_dc() {
        let c = clip(vec![0.7; 1600], 16000);
        let r = resample(&c, 88200).unwrap();
        assert_eq!(r.sample_rate, 88200);
        assert_eq!(r.len(), 8820);
        for v in &r.samples {
            assert!((v - 0.7).abs() < 1e-6);
        }
    }

    #[test]
    fn resample_identity_rate() {
        let c = clip((0..100).map(|i| i as f64 * 0.01).collect(), 8000);
        assert_eq!(resample(&c, 8000).unwrap(), c);
    }

    #[test]
    fn resample_upsampled_sine_matches_analytic() {
        let n = 8000;
        let c = clip((0..n).map(|i| (2.0 * PI * 100.0 * i as f64 / 8000.0).sin()).collect(), 8000);
        let r = resample(&c, 16000).unwrap();
        assert_eq!(r.len(), 16000);
        for (i, v) in r.samples.iter().enumerate().skip(200).take(r.len() - 400) {
            let expected = (2.0 * PI * 100.0 * i as f64 / 16000.0).sin();
            assert!((v - expected).abs() < 1e-3, "i = {i}: {v} vs {expected}");
        }
    }

    #[test]
    fn resampled_len_rounds() {
        assert_eq!(resampled_len(3, 2, 1), 2); // 1.5 -> 2
        assert_eq!(resampled_len(16000, 16000, 88200), 88200);
        assert_eq!(resampled_len(1, 3, 1), 0);
    }

    #[test]
    fn normalize_length_pads_and_crops() {
        let one_second = clip(vec![1.0; 88200], 88200);
        let padded = normalize_length(&one_second, 2.9).unwrap();
        assert_eq!(padded.len(), 255_780);
        let before = (255_780 - 88_200) / 2;
        assert_eq!(padded.samples[before - 1], 0.0);
        assert_eq!(padded.samples[before], 1.0);
        assert_eq!(padded.samples[before + 88_199], 1.0);
        assert_eq!(padded.samples[before + 88_200], 0.0);

        let long: Vec<f64> = (0..5 * 88200).map(|i| i as f64).collect();
        let cropped = normalize_length(&clip(long, 88200), 2.9).unwrap();
        assert_eq!(cropped.len(), 255_780);
        let start = (5 * 88200 - 255_780) / 2;
        assert_eq!(cropped.samples[0], start as f64);

        assert_eq!(normalize_length(&padded, 2.9).unwrap(), padded);
        assert_eq!(normalize_length(&padded, 0.0), Err(SignalError::BadDuration));
    }

    #[test]
    fn labels_from_filenames() {
        assert_eq!(parse_label("03a01Wa.wav", Convention::Emodb), Ok(Emotion::Anger));
        assert_eq!(parse_label("corpus/wav/16b10Tb.wav", Convention::Emodb), Ok(Emotion::Sadness));
        assert_eq!(
            parse_label("03-01-06-01-02-01-12.wav", Convention::Ravdess),
            Ok(Emotion::Fear)
        );
        assert!(matches!(
            parse_label("hello.wav", Convention::Emodb),
            Err(SignalError::UnrecognizedPattern(_))
        ));
        assert!(matches!(
            parse_label("03a01Xa.wav", Convention::Emodb),
            Err(SignalError::UnknownEmotionCode { .. })
        ));
        assert!(matches!(
            parse_label("03-01-09-01-02-01-12.wav", Convention::Ravdess),
            Err(SignalError::UnknownEmotionCode { .. })
        ));
        assert!(matches!(
            parse_label("03-01-06-01.wav", Convention::Ravdess),
            Err(SignalError::UnrecognizedPattern(_))
        ));
    }

    #[test]
    fn every_documented_code_maps_to_one_class() {
        let mut seen = Vec::new();
        for c in ['W', 'L', 'E', 'A', 'F', 'T', 'N'] {
            let name = alloc::format!("03a01{c}a.wav");
            seen.push(parse_label(&name, Convention::Emodb).unwrap());
        }
        seen.sort();
        seen.dedup();
        assert_eq!(seen, Emotion::SEVEN.to_vec());

        let mut seen = Vec::new();
        for code in 1..=8 {
            let name = alloc::format!("03-01-{code:02}-01-02-01-12.wav");
            seen.push(parse_label(&name, Convention::Ravdess).unwrap());
        }
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        assert!(!seen.contains(&Emotion::Boredom));
    }
}
