//! JSON and CSV outputs of the commands. Every JSON document carries a
//! `format` name and a `version`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use optivmd_core::search::{SearchReport, StopReason};
use optivmd_core::{EvalReport, ModeSet};
use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestCell {
    pub index: usize,
    pub k: usize,
    pub alpha: f64,
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// `search_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReportFile {
    pub format: String,
    pub version: u32,
    pub classes: Vec<String>,
    pub k_grid: Vec<usize>,
    pub alpha_grid: Vec<f64>,
    pub seed: u64,
    pub scorer: String,
    pub cells: Vec<optivmd_core::search::Cell>,
    pub best: BestCell,
    pub stop_reason: StopReason,
}

impl SearchReportFile {
    pub fn new(
        report: &SearchReport,
        classes: &[String],
        k_grid: &[usize],
        alpha_grid: &[f64],
        seed: u64,
        scorer: &str,
    ) -> Self {
        let best = report.best();
        Self {
            format: "optivmd-search-report".into(),
            version: REPORT_VERSION,
            classes: classes.to_vec(),
            k_grid: k_grid.to_vec(),
            alpha_grid: alpha_grid.to_vec(),
            seed,
            scorer: scorer.into(),
            cells: report.cells.clone(),
            best: BestCell {
                index: report.best_index,
                k: report.best_k,
                alpha: report.best_alpha,
                accuracy: best.accuracy().unwrap_or(0.0),
                macro_f1: best.macro_f1().unwrap_or(0.0),
            },
            stop_reason: report.stop_reason,
        }
    }

    /// Back to the in-memory report, checking the best cell is consistent.
    pub fn to_report(&self) -> Result<SearchReport, String> {
        let cell = self
            .cells
            .get(self.best.index)
            .ok_or_else(|| format!("best index {} outside {} cells", self.best.index, self.cells.len()))?;
        if cell.k != self.best.k || cell.alpha != self.best.alpha {
            return Err("best cell does not match its index".into());
        }
        Ok(SearchReport {
            cells: self.cells.clone(),
            best_index: self.best.index,
            best_k: self.best.k,
            best_alpha: self.best.alpha,
            stop_reason: self.stop_reason,
        })
    }
}

/// `eval_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReportFile {
    pub format: String,
    pub version: u32,
    pub classes: Vec<String>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub scorer: String,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: Vec<f64>,
    pub confusion: Vec<Vec<u64>>,
}

impl EvalReportFile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        report: &EvalReport,
        classes: &[String],
        augment: Option<(usize, f64)>,
        seed: u64,
        scorer: &str,
        train_size: usize,
        test_size: usize,
    ) -> Self {
        Self {
            format: "optivmd-eval-report".into(),
            version: REPORT_VERSION,
            classes: classes.to_vec(),
            k: augment.map(|a| a.0),
            alpha: augment.map(|a| a.1),
            seed,
            scorer: scorer.into(),
            train_size,
            test_size,
            accuracy: report.accuracy,
            macro_f1: report.macro_f1,
            per_class_f1: report.per_class_f1(),
            confusion: report.confusion.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: String,
    pub error: String,
}

/// `summary.json` written by `extract`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractSummary {
    pub format: String,
    pub version: u32,
    pub total: usize,
    pub extracted: usize,
    pub skipped: usize,
    pub per_class: BTreeMap<String, usize>,
    pub shape: Option<[usize; 3]>,
    pub channels: Vec<String>,
    pub failures: Vec<SkippedFile>,
}

impl ExtractSummary {
    pub fn new(per_class: BTreeMap<String, usize>, failures: Vec<SkippedFile>, shape: Option<[usize; 3]>, channels: Vec<String>) -> Self {
        let extracted = per_class.values().sum();
        Self {
            format: "optivmd-extract-summary".into(),
            version: REPORT_VERSION,
            total: extracted + failures.len(),
            extracted,
            skipped: failures.len(),
            per_class,
            shape,
            channels,
            failures,
        }
    }
}

/// Confusion matrix with a header row of predicted classes and one row per true class.
pub fn confusion_csv(confusion: &[Vec<u64>], classes: &[String]) -> String {
    let mut s = String::from("truth\\predicted");
    for c in classes {
        let _ = write!(s, ",{c}");
    }
    s.push('\n');
    for (name, row) in classes.iter().zip(confusion) {
        s.push_str(name);
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// `k,omega_cycles_per_sample,hz`, one row per mode in ascending order.
pub fn omegas_csv(set: &ModeSet, sample_rate: f64) -> String {
    let mut s = String::from("k,omega_cycles_per_sample,hz\n");
    for (k, w) in set.omegas.iter().enumerate() {
        let _ = writeln!(s, "{k},{w},{}", w * sample_rate);
    }
    s
}

/// `iter,k,omega` for every sweep, iteration 0 being the initialization.
pub fn convergence_csv(set: &ModeSet) -> String {
    let mut s = String::from("iter,k,omega\n");
    for (it, row) in set.trajectory.iter().enumerate() {
        for (k, w) in row.iter().enumerate() {
            let _ = writeln!(s, "{it},{k},{w}");
        }
    }
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::io::Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
