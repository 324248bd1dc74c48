//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or format error, 3 invalid
//! parameters or input, 4 non-finite values, 5 every search cell failed,
//! 6 scorer failure during `eval`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use optivmd_core::augment::{augment_map, AugmentError, AugmentParams};
use optivmd_core::dataset::{DatasetError, LabeledDataset, SplitTag};
use optivmd_core::scorer::ScorerError;
use optivmd_core::search::{optivmd_search, SearchError, StopRule};
use optivmd_core::{decompose, AudioClip, Scorer, VmdError, VmdParams};
use serde_json::json;

use crate::config::{parse_omega_init, ConfigError, PipelineConfig};
use crate::external::AnyScorer;
use crate::fmap::{read_fmap, write_fmap, FmapError};
use crate::manifest::{load_dataset, read_manifest, write_manifest, ManifestError, ManifestRow};
use crate::report::{
    confusion_csv, convergence_csv, omegas_csv, read_json, write_json, EvalReportFile, ExtractSummary, SearchReportFile,
    SkippedFile,
};
use crate::runner::{extract_corpus, prepare_dataset, search_parallel, WallClock};
use crate::svg::{render_heatmap_svg, render_surface_svg, SvgError};
use crate::wav::{load_wav, write_wav, WavEncoding, WavError};

#[derive(Debug, Parser)]
#[command(name = "optivmd", version, about = "Variational mode decomposition, feature maps and (K, alpha) search")]
#[command(after_help = "Exit codes: 0 ok, 1 usage, 2 I/O or format, 3 invalid parameters, \
4 non-finite values, 5 all search cells failed, 6 scorer failure in eval.")]
pub struct Cli {
    /// Pipeline configuration file (flat `key = value`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for the split, SMOTE and the softmax scorer; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print one JSON object on stdout and nothing else.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a WAV file into modes.
    Decompose(DecomposeArgs),
    /// Extract feature maps from a corpus directory.
    Extract(ExtractArgs),
    /// Apply VMD augmentation to a manifest's maps or a single map.
    Augment(AugmentArgs),
    /// Search the (K, alpha) grid.
    Search(SearchArgs),
    /// Train and evaluate once, optionally after augmentation.
    Eval(EvalArgs),
    /// Render a feature map or a search report as SVG.
    Render(RenderArgs),
    /// Print the effective configuration.
    Config,
}

#[derive(Debug, Args)]
pub struct VmdFlags {
    /// Number of modes (overrides vmd.k).
    #[arg(long)]
    pub k: Option<usize>,
    /// Bandwidth penalty (overrides vmd.alpha).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dual ascent step; 0 leaves a noise residual.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Relative change in the modes that counts as converged.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// uniform, zero or random:<seed>
    #[arg(long)]
    pub omega_init: Option<String>,
    /// Decompose the signal as is, without mirror extension.
    #[arg(long)]
    pub no_mirror: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// WAV file.
    pub input: PathBuf,
    /// Directory for mode_<k>.wav, omegas.csv and convergence.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub vmd: VmdFlags,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory searched recursively for labelled WAV files.
    pub corpus: PathBuf,
    /// Directory for the maps, manifest.csv and summary.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Decompose each waveform first and extract from the mode sum.
    #[arg(long)]
    pub pre_feature: bool,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// A manifest CSV or a single `.fmap` file.
    pub input: PathBuf,
    /// Output directory; a manifest input also gets a new manifest.csv there.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of modes (overrides vmd.k).
    #[arg(long)]
    pub k: Option<usize>,
    /// Bandwidth penalty (overrides vmd.alpha).
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SplitFlags {
    /// SMOTE on the whole dataset before splitting.
    #[arg(long)]
    pub smote_first: bool,
    /// Share of each class held out for testing (overrides search.test_fraction).
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Skip SMOTE oversampling.
    #[arg(long)]
    pub no_smote: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Manifest CSV of feature maps.
    pub manifest: PathBuf,
    /// Directory for search_report.json, confusion_best.csv and surface.svg.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated K values.
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<usize>>,
    /// Comma-separated alpha values.
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    /// Stop after this many cells without a new best accuracy.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Stop once a cell reaches this accuracy.
    #[arg(long)]
    pub target: Option<f64>,
    /// Evaluate the whole grid regardless of the configured stop rule.
    #[arg(long, conflicts_with_all = ["patience", "target"])]
    pub no_stop: bool,
    /// Evaluate cells one at a time so early stopping saves work.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub split: SplitFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Manifest CSV of feature maps.
    pub manifest: PathBuf,
    /// Directory for eval_report.json and confusion.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Augment with this K before training (requires --alpha).
    #[arg(long, requires = "alpha")]
    pub k: Option<usize>,
    /// Bandwidth penalty for the augmentation (requires --k).
    #[arg(long, requires = "k")]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub split: SplitFlags,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// A `.fmap` file or a `search_report.json`.
    pub input: PathBuf,
    /// Output SVG file.
    #[arg(long)]
    pub out: PathBuf,
    /// Map channel to draw.
    #[arg(long, default_value_t = 0)]
    pub channel: usize,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn io(e: impl std::fmt::Display) -> Self {
        Self::new(2, e.to_string())
    }

    fn invalid(e: impl std::fmt::Display) -> Self {
        Self::new(3, e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(e) => Self::io(e),
            other => Self::invalid(other),
        }
    }
}

impl From<VmdError> for CliError {
    fn from(e: VmdError) -> Self {
        match e {
            VmdError::NonFiniteValue { .. } => Self::new(4, e.to_string()),
            other => Self::invalid(other),
        }
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::Vmd(v) => v.into(),
            other => Self::invalid(other),
        }
    }
}

impl From<WavError> for CliError {
    fn from(e: WavError) -> Self {
        match e {
            WavError::Signal(s) => Self::invalid(s),
            other => Self::io(other),
        }
    }
}

impl From<FmapError> for CliError {
    fn from(e: FmapError) -> Self {
        Self::io(e)
    }
}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        match e {
            ManifestError::Dataset(d) => Self::invalid(d),
            other => Self::io(other),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        Self::invalid(e)
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::FailedAllCells(_) => Self::new(5, e.to_string()),
            other => Self::invalid(other),
        }
    }
}

impl From<ScorerError> for CliError {
    fn from(e: ScorerError) -> Self {
        match e {
            ScorerError::NonFinite => Self::new(4, e.to_string()),
            ScorerError::Dataset(d) => Self::invalid(d),
            ScorerError::InvalidParams { .. } => Self::invalid(e),
            other => Self::new(6, other.to_string()),
        }
    }
}

impl From<SvgError> for CliError {
    fn from(e: SvgError) -> Self {
        Self::invalid(e)
    }
}

/// Effective configuration: file (or defaults) plus the global seed override.
pub fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.apply_seed(seed);
    }
    Ok(config)
}

/// Run a parsed command line; returns the JSON summary printed with `--json`.
pub fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let mut config = load_config(cli)?;
    match &cli.command {
        Command::Decompose(a) => cmd_decompose(&config, a),
        Command::Extract(a) => {
            config.pre_feature |= a.pre_feature;
            cmd_extract(&config, a)
        }
        Command::Augment(a) => cmd_augment(&config, a),
        Command::Search(a) => cmd_search(&config, a),
        Command::Eval(a) => cmd_eval(&config, a),
        Command::Render(a) => cmd_render(a),
        Command::Config => Ok(json!({ "config": config.dump() })),
    }
}

fn vmd_params(config: &PipelineConfig, f: &VmdFlags) -> Result<VmdParams, CliError> {
    let mut p = config.vmd.clone();
    if let Some(k) = f.k {
        p.k = k;
    }
    if let Some(a) = f.alpha {
        p.alpha = a;
    }
    if let Some(t) = f.tau {
        p.tau = t;
    }
    if let Some(t) = f.tol {
        p.tol = t;
    }
    if let Some(m) = f.max_iter {
        p.max_iter = m;
    }
    if let Some(s) = &f.omega_init {
        p.omega_init = parse_omega_init(s).map_err(|e| CliError::invalid(format!("invalid parameter omega_init: {e}")))?;
    }
    if f.no_mirror {
        p.mirror_extend = false;
    }
    p.validate()?;
    Ok(p)
}

fn cmd_decompose(config: &PipelineConfig, a: &DecomposeArgs) -> Result<serde_json::Value, CliError> {
    let params = vmd_params(config, &a.vmd)?;
    let clip = load_wav(&a.input)?;
    let set = decompose(&clip.samples, &params)?;
    std::fs::create_dir_all(&a.out)?;
    let sr = clip.sample_rate as f64;
    for (k, mode) in set.modes.iter().enumerate() {
        let m = AudioClip::new(mode.clone(), clip.sample_rate, format!("mode_{k}")).map_err(CliError::invalid)?;
        write_wav(&a.out.join(format!("mode_{k}.wav")), &m, WavEncoding::Float32)?;
    }
    std::fs::write(a.out.join("omegas.csv"), omegas_csv(&set, sr))?;
    std::fs::write(a.out.join("convergence.csv"), convergence_csv(&set))?;
    log::info!(
        "{} modes, {} iterations, converged: {}",
        set.k(),
        set.iterations,
        set.converged
    );
    Ok(json!({
        "modes": set.k(),
        "omegas": set.omegas,
        "hz": set.omegas_hz(sr),
        "iterations": set.iterations,
        "converged": set.converged,
        "out": a.out,
    }))
}

fn cmd_extract(config: &PipelineConfig, a: &ExtractArgs) -> Result<serde_json::Value, CliError> {
    let results = extract_corpus(&a.corpus, config)?;
    std::fs::create_dir_all(&a.out)?;
    let mut rows = Vec::new();
    let mut per_class: BTreeMap<String, usize> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut shape = None;
    let mut channels = Vec::new();
    for item in results {
        let outcome = item.outcome.and_then(|(map, emotion)| {
            write_fmap(&a.out.join(&item.fmap_name), &map)
                .map(|()| (map, emotion))
                .map_err(|e| e.to_string())
        });
        match outcome {
            Ok((map, emotion)) => {
                let (h, w, c) = map.shape();
                shape = Some([h, w, c]);
                channels = map.channel_names.clone();
                *per_class.entry(emotion.name().to_string()).or_default() += 1;
                rows.push(ManifestRow {
                    fmap_path: item.fmap_name,
                    label: emotion.name().to_string(),
                    split: String::new(),
                });
            }
            Err(error) => {
                log::warn!("skipping {}: {error}", item.path.display());
                failures.push(SkippedFile {
                    path: item.path.display().to_string(),
                    error,
                });
            }
        }
    }
    let summary = ExtractSummary::new(per_class, failures, shape, channels);
    write_json(&a.out.join("summary.json"), &summary)?;
    if rows.is_empty() {
        return Err(CliError::io(format!(
            "no parsable WAV files under {} ({} skipped)",
            a.corpus.display(),
            summary.skipped
        )));
    }
    write_manifest(&a.out.join("manifest.csv"), &rows)?;
    log::info!("extracted {} maps, skipped {}", summary.extracted, summary.skipped);
    serde_json::to_value(&summary).map_err(CliError::io)
}

fn augment_params(config: &PipelineConfig, k: Option<usize>, alpha: Option<f64>) -> AugmentParams {
    AugmentParams {
        k: k.unwrap_or(config.vmd.k),
        alpha: alpha.unwrap_or(config.vmd.alpha),
        tau: config.vmd.tau,
        tol: config.vmd.tol,
        max_iter: config.vmd.max_iter,
    }
}

fn is_fmap(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "fmap")
}

fn cmd_augment(config: &PipelineConfig, a: &AugmentArgs) -> Result<serde_json::Value, CliError> {
    let params = augment_params(config, a.k, a.alpha);
    params.vmd().validate()?;
    std::fs::create_dir_all(&a.out)?;
    if is_fmap(&a.input) {
        let map = read_fmap(&a.input)?;
        let out = a.out.join(a.input.file_name().expect("file name"));
        write_fmap(&out, &augment_map(&map, &params)?)?;
        return Ok(json!({ "maps": 1, "k": params.k, "alpha": params.alpha, "out": out }));
    }
    let rows = read_manifest(&a.input)?;
    let base = a.input.parent().unwrap_or(Path::new("."));
    let mut out_rows = Vec::with_capacity(rows.len());
    let maps: Vec<_> = {
        use rayon::prelude::*;
        rows.par_iter()
            .map(|r| -> Result<_, CliError> {
                let src = base.join(&r.fmap_path);
                let name = src.file_name().expect("file name").to_owned();
                let map = read_fmap(&src)?;
                Ok((name, augment_map(&map, &params)?))
            })
            .collect::<Result<_, _>>()?
    };
    for (r, (name, map)) in rows.iter().zip(maps) {
        write_fmap(&a.out.join(&name), &map)?;
        out_rows.push(ManifestRow {
            fmap_path: name.to_string_lossy().into_owned(),
            ..r.clone()
        });
    }
    write_manifest(&a.out.join("manifest.csv"), &out_rows)?;
    Ok(json!({ "maps": out_rows.len(), "k": params.k, "alpha": params.alpha, "out": a.out }))
}

fn prepared(config: &PipelineConfig, manifest: &Path, f: &SplitFlags) -> Result<LabeledDataset, CliError> {
    let ds = load_dataset(manifest)?;
    if ds.n_classes() < 2 {
        return Err(CliError::invalid(format!("{} has fewer than two classes", manifest.display())));
    }
    let fraction = f.test_fraction.unwrap_or(config.test_fraction);
    let smote = if f.no_smote { None } else { config.smote };
    let ds = prepare_dataset(&ds, fraction, smote, config.smote_first || f.smote_first, config.seed)?;
    log::info!(
        "{} train / {} test items",
        ds.indices(SplitTag::Train).len(),
        ds.indices(SplitTag::Test).len()
    );
    Ok(ds)
}

fn cmd_search(config: &PipelineConfig, a: &SearchArgs) -> Result<serde_json::Value, CliError> {
    let k_grid = a.k_grid.clone().unwrap_or_else(|| config.k_grid.clone());
    let alpha_grid = a.alpha_grid.clone().unwrap_or_else(|| config.alpha_grid.clone());
    let mut stop = if a.no_stop { StopRule::NEVER } else { config.stop };
    if a.patience.is_some() {
        stop.patience = a.patience;
    }
    if a.target.is_some() {
        stop.target = a.target;
    }
    let ds = prepared(config, &a.manifest, &a.split)?;
    let scorer = AnyScorer::from_spec(&config.scorer);
    let report = if a.sequential {
        optivmd_search(&ds, &k_grid, &alpha_grid, &scorer, &stop, &WallClock::default())?
    } else {
        search_parallel(&ds, &k_grid, &alpha_grid, &scorer, &stop)?
    };
    std::fs::create_dir_all(&a.out)?;
    let file = SearchReportFile::new(&report, &ds.class_names, &k_grid, &alpha_grid, config.seed, config.scorer.kind());
    write_json(&a.out.join("search_report.json"), &file)?;
    let best = report.best().report.as_ref().expect("best cell succeeded");
    std::fs::write(a.out.join("confusion_best.csv"), confusion_csv(&best.confusion, &ds.class_names))?;
    std::fs::write(a.out.join("surface.svg"), render_surface_svg(&report, &k_grid, &alpha_grid))?;
    log::info!(
        "best K={} alpha={} accuracy {:.4} ({})",
        report.best_k,
        report.best_alpha,
        best.accuracy,
        report.stop_reason
    );
    Ok(json!({
        "cells": report.cells.len(),
        "best": file.best,
        "stop_reason": report.stop_reason,
        "out": a.out,
    }))
}

fn cmd_eval(config: &PipelineConfig, a: &EvalArgs) -> Result<serde_json::Value, CliError> {
    let ds = prepared(config, &a.manifest, &a.split)?;
    let augment = a.k.zip(a.alpha);
    let ds = match augment {
        Some((k, alpha)) => {
            let params = augment_params(config, Some(k), Some(alpha));
            params.vmd().validate()?;
            ds.map_maps(|m| augment_map(m, &params))?
        }
        None => ds,
    };
    let scorer = AnyScorer::from_spec(&config.scorer);
    let report = scorer.train_eval(&ds)?;
    std::fs::create_dir_all(&a.out)?;
    let file = EvalReportFile::new(
        &report,
        &ds.class_names,
        augment,
        config.seed,
        config.scorer.kind(),
        ds.indices(SplitTag::Train).len(),
        ds.indices(SplitTag::Test).len(),
    );
    write_json(&a.out.join("eval_report.json"), &file)?;
    std::fs::write(a.out.join("confusion.csv"), confusion_csv(&report.confusion, &ds.class_names))?;
    log::info!("accuracy {:.4}, macro F1 {:.4}", report.accuracy, report.macro_f1);
    serde_json::to_value(&file).map_err(CliError::io)
}

fn cmd_render(a: &RenderArgs) -> Result<serde_json::Value, CliError> {
    let svg = if is_fmap(&a.input) {
        render_heatmap_svg(&read_fmap(&a.input)?, a.channel)?
    } else {
        let file: SearchReportFile = read_json(&a.input)?;
        let report = file.to_report().map_err(CliError::io)?;
        render_surface_svg(&report, &file.k_grid, &file.alpha_grid)
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&a.out, &svg)?;
    Ok(json!({ "out": a.out, "bytes": svg.len() }))
}

/// Print a command's result the way `--json` asks for.
pub fn print_result(cli: &Cli, value: &serde_json::Value) {
    if cli.json {
        println!("{value}");
    } else if let Command::Config = cli.command {
        print!("{}", value["config"].as_str().unwrap_or_default());
    } else {
        println!("{}", serde_json::to_string_pretty(value).unwrap_or_default());
    }
}
