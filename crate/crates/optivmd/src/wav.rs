//! RIFF/WAVE reading and writing.
//!
//! Accepted input: PCM integer at 16 or 24 bits, or 32-bit float, with one or
//! two channels. Integers are scaled by `2^(bits-1)`; stereo is averaged.

use std::fs::File;
use std::io::{BufReader, Read, Seek};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use optivmd_core::{AudioClip, SignalError};

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error("not a RIFF/WAVE file")]
    NotWav,
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("file is truncated")]
    TruncatedFile,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

fn map_hound(e: hound::Error) -> WavError {
    match e {
        hound::Error::IoError(io)
            if io.kind() == std::io::ErrorKind::UnexpectedEof || io.to_string().contains("enough bytes") =>
        {
            WavError::TruncatedFile
        }
        hound::Error::IoError(io) => WavError::Io(io),
        hound::Error::FormatError(msg) if msg.contains("RIFF") || msg.contains("WAVE") => WavError::NotWav,
        hound::Error::FormatError(msg) => WavError::UnsupportedEncoding(msg.to_string()),
        hound::Error::Unsupported => WavError::UnsupportedEncoding("codec not supported".into()),
        hound::Error::UnfinishedSample => WavError::TruncatedFile,
        other => WavError::UnsupportedEncoding(other.to_string()),
    }
}

/// Decode a WAV stream into a mono clip.
pub fn read_wav<R: Read>(reader: R, source_id: &str) -> Result<AudioClip, WavError> {
    let mut reader = WavReader::new(reader).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if !(1..=2).contains(&channels) {
        return Err(WavError::UnsupportedEncoding(format!("{channels} channels")));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24)) => {
            let scale = (1u32 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()
                .map_err(map_hound)?
        }
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (fmt, bits) => {
            return Err(WavError::UnsupportedEncoding(format!("{fmt:?} at {bits} bits")));
        }
    };
    if interleaved.len() % channels != 0 {
        return Err(WavError::TruncatedFile);
    }
    let samples: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    Ok(AudioClip::new(samples, spec.sample_rate, source_id)?)
}

pub fn load_wav(path: &Path) -> Result<AudioClip, WavError> {
    let file = File::open(path)?;
    read_wav(BufReader::new(file), &path.display().to_string())
}

/// Output sample encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Pcm24,
    Float32,
}

impl WavEncoding {
    fn spec(self, sample_rate: u32) -> WavSpec {
        let (bits_per_sample, sample_format) = match self {
            WavEncoding::Pcm16 => (16, SampleFormat::Int),
            WavEncoding::Pcm24 => (24, SampleFormat::Int),
            WavEncoding::Float32 => (32, SampleFormat::Float),
        };
        WavSpec {
            channels: 1,
            sample_rate,
            bits_per_sample,
            sample_format,
        }
    }
}

/// Encode a clip as mono WAV. Integer encodings round and clip to the representable range.
pub fn write_wav_to<W: std::io::Write + Seek>(
    writer: W,
    clip: &AudioClip,
    encoding: WavEncoding,
) -> Result<(), WavError> {
    let mut w = WavWriter::new(writer, encoding.spec(clip.sample_rate)).map_err(map_hound)?;
    match encoding {
        WavEncoding::Float32 => {
            for &s in &clip.samples {
                w.write_sample(s as f32).map_err(map_hound)?;
            }
        }
        WavEncoding::Pcm16 | WavEncoding::Pcm24 => {
            let bits = if encoding == WavEncoding::Pcm16 { 16 } else { 24 };
            let scale = (1i64 << (bits - 1)) as f64;
            let (lo, hi) = (-scale, scale - 1.0);
            for &s in &clip.samples {
                w.write_sample((s * scale).round().clamp(lo, hi) as i32).map_err(map_hound)?;
            }
        }
    }
    w.finalize().map_err(map_hound)?;
    Ok(())
}

pub fn write_wav(path: &Path, clip: &AudioClip, encoding: WavEncoding) -> Result<(), WavError> {
    let file = std::io::BufWriter::new(File::create(path)?);
    write_wav_to(file, clip, encoding)
}
