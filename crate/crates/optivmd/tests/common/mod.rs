#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use optivmd::manifest::save_dataset;
use optivmd::synth::{chirp_dataset, small_extract_config, ChirpSpec};
use optivmd::wav::{write_wav, WavEncoding};
use optivmd_core::dataset::LabeledDataset;
use optivmd_core::AudioClip;

pub fn optivmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optivmd"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run optivmd")
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn write_clip(path: &Path, samples: Vec<f64>, sample_rate: u32) {
    let clip = AudioClip::new(samples, sample_rate, "test").unwrap();
    write_wav(path, &clip, WavEncoding::Float32).unwrap();
}

pub fn two_tone() -> Vec<f64> {
    (0..1000)
        .map(|i| {
            let t = i as f64 / 1000.0;
            0.4 * (2.0 * PI * 50.0 * t).cos() + 0.4 * (2.0 * PI * 200.0 * t).cos()
        })
        .collect()
}

/// Voiced-like test clip: a few harmonics of `f0` with a slow amplitude wobble.
pub fn harmonic_clip(f0: f64, sample_rate: u32, seconds: f64) -> Vec<f64> {
    let n = (seconds * sample_rate as f64) as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate as f64;
            let env = 0.6 + 0.4 * (2.0 * PI * 3.0 * t).sin();
            env * (1..=4).map(|h| (2.0 * PI * f0 * h as f64 * t).sin() / h as f64).sum::<f64>() * 0.3
        })
        .collect()
}

/// The three-class chirp dataset written as FMAPs plus a manifest.
pub fn chirp_manifest(dir: &Path, spec: &ChirpSpec) -> (PathBuf, LabeledDataset) {
    let ds = chirp_dataset(spec, &small_extract_config(spec)).unwrap();
    let manifest = save_dataset(&ds, dir, "clip_", "manifest.csv").unwrap();
    (manifest, ds)
}
