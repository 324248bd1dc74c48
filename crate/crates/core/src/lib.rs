//! Variational mode decomposition, acoustic feature maps and the
//! accuracy-driven search over decomposition parameters.
//!
//! The crate is `no_std` and only needs an allocator. File formats, audio IO
//! and the command line live in the `optivmd` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod math;

pub mod augment;
pub mod dataset;
pub mod features;
pub mod fft;
pub mod metrics;
pub mod scorer;
pub mod search;
pub mod signal;
pub mod vmd;

pub use signal::{AudioClip, Convention, Emotion, EmotionLabel, SignalError};
pub use vmd::{analytic_spectrum, decompose, ModeSet, OmegaInit, VmdError, VmdParams};
pub use augment::{augment_map, AugmentParams};
pub use dataset::{smote_balance, split, LabeledDataset, SmoteParams, SplitTag};
pub use features::{extract_map, ExtractConfig, FeatureKind, FeatureMap, FeatureMatrix, Recipe};
pub use metrics::{metrics, EvalReport};
pub use scorer::{Scorer, ScorerSpec};
pub use search::{optivmd_search, SearchReport, StopReason, StopRule};
