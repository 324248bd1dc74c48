//! Orchestration shared by the commands: dataset preparation, parallel grid
//! evaluation and corpus extraction.

use std::path::{Path, PathBuf};
use std::time::Instant;

use optivmd_core::augment::{denoise_clip, AugmentParams};
use optivmd_core::dataset::{balance_training, smote_balance, split, DatasetError, LabeledDataset, SmoteParams};
use optivmd_core::search::{assemble_report, evaluate_cell, grid_cells, Clock, SearchError, SearchReport, StopRule};
use optivmd_core::{extract_map, Emotion, FeatureMap, Scorer};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::corpus::{fmap_name, scan_corpus};
use crate::wav::load_wav;

/// Seconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl Default for WallClock {
    fn default() -> Self {
        Self(Instant::now())
    }
}

impl Clock for WallClock {
    fn now_s(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Split (unless every item already carries a tag) and balance with SMOTE.
/// By default SMOTE touches only the training partition; `smote_first`
/// oversamples the whole dataset first and splits afterwards.
pub fn prepare_dataset(
    dataset: &LabeledDataset,
    test_fraction: f64,
    smote: Option<SmoteParams>,
    smote_first: bool,
    seed: u64,
) -> Result<LabeledDataset, DatasetError> {
    let tagged = !dataset.is_empty() && dataset.split.iter().all(Option::is_some);
    if smote_first {
        let balanced = match smote {
            Some(p) => smote_balance(dataset, &p)?,
            None => dataset.clone(),
        };
        return if tagged && smote.is_none() {
            Ok(balanced)
        } else {
            split(&balanced, test_fraction, seed)
        };
    }
    let ds = if tagged {
        dataset.clone()
    } else {
        split(dataset, test_fraction, seed)?
    };
    match smote {
        Some(p) => balance_training(&ds, &p),
        None => Ok(ds),
    }
}

/// Evaluate every grid cell in parallel, then apply the stop rule in grid
/// order. Gives the same cells and selection as the sequential search.
pub fn search_parallel<S: Scorer + Sync + ?Sized>(
    dataset: &LabeledDataset,
    k_grid: &[usize],
    alpha_grid: &[f64],
    scorer: &S,
    stop: &StopRule,
) -> Result<SearchReport, SearchError> {
    if k_grid.is_empty() {
        return Err(SearchError::EmptyGrid("K"));
    }
    if alpha_grid.is_empty() {
        return Err(SearchError::EmptyGrid("alpha"));
    }
    stop.validate()?;
    dataset.check_split()?;
    let clock = WallClock::default();
    let cells = grid_cells(k_grid, alpha_grid)
        .into_par_iter()
        .map(|(k, alpha)| {
            let cell = evaluate_cell(dataset, k, alpha, scorer, &clock);
            log::info!(
                "cell K={k} alpha={alpha}: {}",
                cell.accuracy().map_or_else(|| format!("failed ({})", cell.error.as_deref().unwrap_or("?")), |a| format!("accuracy {a:.4}"))
            );
            cell
        })
        .collect();
    assemble_report(cells, stop)
}

/// Result of extracting one corpus file.
#[derive(Debug)]
pub struct Extracted {
    pub path: PathBuf,
    pub fmap_name: String,
    pub outcome: Result<(FeatureMap, Emotion), String>,
}

/// Load, label and extract every WAV below `root` in parallel; output order follows the sorted paths.
pub fn extract_corpus(root: &Path, config: &PipelineConfig) -> std::io::Result<Vec<Extracted>> {
    let entries = scan_corpus(root, config.convention)?;
    let vmd = AugmentParams {
        k: config.vmd.k,
        alpha: config.vmd.alpha,
        tau: config.vmd.tau,
        tol: config.vmd.tol,
        max_iter: config.vmd.max_iter,
    };
    Ok(entries
        .into_par_iter()
        .map(|entry| {
            let name = fmap_name(root, &entry.path);
            let outcome = (|| {
                let emotion = entry.label.map_err(|e| e.to_string())?;
                if config.seven_class && !emotion.in_seven_class_setup() {
                    return Err(format!("{emotion} is outside the seven-class setup"));
                }
                let clip = load_wav(&entry.path).map_err(|e| e.to_string())?;
                let map = if config.pre_feature {
                    let prepared = config.extract.prepare(&clip).map_err(|e| e.to_string())?;
                    let smooth = denoise_clip(&prepared, &vmd).map_err(|e| e.to_string())?;
                    extract_map(&smooth, &config.extract)
                } else {
                    extract_map(&clip, &config.extract)
                }
                .map_err(|e| e.to_string())?;
                Ok((map, emotion))
            })();
            Extracted {
                path: entry.path,
                fmap_name: name,
                outcome,
            }
        })
        .collect())
}
