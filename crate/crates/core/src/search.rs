//! Grid search over `(K, alpha)`: augment every map with each pair, score the
//! augmented dataset, keep the most accurate pair.
//!
//! Cells run in row-major order (`K` outer, `alpha` inner). The stop rule is
//! applied in that order, so a parallel caller can evaluate cells in any order
//! and pass them through [`assemble_report`] to get the same report.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::augment::{augment_map, AugmentParams};
use crate::dataset::LabeledDataset;
use crate::metrics::EvalReport;
use crate::scorer::Scorer;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("empty {0} grid")]
    EmptyGrid(&'static str),
    #[error("every grid cell failed; first error: {0}")]
    FailedAllCells(String),
    #[error("invalid stop rule: {0}")]
    BadStopRule(&'static str),
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}

/// Seconds since an arbitrary origin; lets `no_std` callers opt out of timing.
pub trait Clock {
    fn now_s(&self) -> f64;
}

/// A clock that never advances.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_s(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StopRule {
    /// Stop after this many consecutive cells without a new best accuracy.
    pub patience: Option<usize>,
    /// Stop as soon as a cell reaches this accuracy.
    pub target: Option<f64>,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            patience: Some(6),
            target: Some(0.99),
        }
    }
}

impl StopRule {
    pub const NEVER: StopRule = StopRule {
        patience: None,
        target: None,
    };

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.patience == Some(0) {
            return Err(SearchError::BadStopRule("patience must be at least 1"));
        }
        if let Some(t) = self.target {
            if !(0.0..=1.0).contains(&t) {
                return Err(SearchError::BadStopRule("target must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StopReason {
    GridExhausted,
    EarlyStop,
    AccuracyTarget,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::GridExhausted => "grid-exhausted",
            StopReason::EarlyStop => "early-stop",
            StopReason::AccuracyTarget => "accuracy-target",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One evaluated `(K, alpha)` pair. `report` is `None` when the cell failed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub k: usize,
    pub alpha: f64,
    pub report: Option<EvalReport>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl Cell {
    pub fn accuracy(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.accuracy)
    }

    pub fn macro_f1(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.macro_f1)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchReport {
    pub cells: Vec<Cell>,
    /// Index into `cells` of the selected pair.
    pub best_index: usize,
    pub best_k: usize,
    pub best_alpha: f64,
    pub stop_reason: StopReason,
}

impl SearchReport {
    pub fn best(&self) -> &Cell {
        &self.cells[self.best_index]
    }
}

/// Row-major grid order.
pub fn grid_cells(k_grid: &[usize], alpha_grid: &[f64]) -> Vec<(usize, f64)> {
    k_grid
        .iter()
        .flat_map(|&k| alpha_grid.iter().map(move |&a| (k, a)))
        .collect()
}

/// Highest accuracy among successful cells; ties go to the smaller `K`, then the smaller `alpha`.
pub fn select_best(cells: &[Cell]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, cell) in cells.iter().enumerate() {
        let Some(acc) = cell.accuracy() else { continue };
        best = match best {
            None => Some(i),
            Some(b) => {
                let cur = &cells[b];
                let cur_acc = cur.accuracy().unwrap_or(f64::NEG_INFINITY);
                let better = acc > cur_acc
                    || (acc == cur_acc
                        && (cell.k < cur.k || (cell.k == cur.k && cell.alpha < cur.alpha)));
                Some(if better { i } else { b })
            }
        };
    }
    best
}

/// Tracks the stop rule over cells seen in grid order.
#[derive(Debug, Clone)]
struct StopTracker {
    rule: StopRule,
    best: Option<f64>,
    stale: usize,
}

impl StopTracker {
    fn new(rule: StopRule) -> Self {
        Self {
            rule,
            best: None,
            stale: 0,
        }
    }

    /// Feed the next cell; returns a reason if the search should stop after it.
    fn observe(&mut self, cell: &Cell) -> Option<StopReason> {
        match cell.accuracy() {
            Some(acc) if self.best.is_none_or(|b| acc > b) => {
                self.best = Some(acc);
                self.stale = 0;
            }
            _ => self.stale += 1,
        }
        if let (Some(t), Some(acc)) = (self.rule.target, cell.accuracy()) {
            if acc >= t {
                return Some(StopReason::AccuracyTarget);
            }
        }
        if self.rule.patience.is_some_and(|p| self.stale >= p) {
            return Some(StopReason::EarlyStop);
        }
        None
    }
}

/// Augment every map of `dataset` with `(k, alpha)` and score the result.
pub fn evaluate_cell<S: Scorer + ?Sized>(
    dataset: &LabeledDataset,
    k: usize,
    alpha: f64,
    scorer: &S,
    clock: &dyn Clock,
) -> Cell {
    let start = clock.now_s();
    let params = AugmentParams::new(k, alpha);
    let outcome = dataset
        .map_maps(|m| augment_map(m, &params))
        .map_err(|e| e.to_string())
        .and_then(|aug| scorer.train_eval(&aug).map_err(|e| e.to_string()));
    let (report, error) = match outcome {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e)),
    };
    Cell {
        k,
        alpha,
        report,
        error,
        wall_time_s: clock.now_s() - start,
    }
}

/// Apply the stop rule to cells given in grid order, drop any cells past the
/// stopping point and select the best one.
pub fn assemble_report(mut cells: Vec<Cell>, stop: &StopRule) -> Result<SearchReport, SearchError> {
    let total = cells.len();
    let mut tracker = StopTracker::new(*stop);
    let mut reason = StopReason::GridExhausted;
    for i in 0..total {
        if let Some(r) = tracker.observe(&cells[i]) {
            if i + 1 < total {
                reason = r;
                cells.truncate(i + 1);
                break;
            }
        }
    }
    finish(cells, reason)
}

fn finish(cells: Vec<Cell>, stop_reason: StopReason) -> Result<SearchReport, SearchError> {
    let Some(best_index) = select_best(&cells) else {
        let first = cells
            .iter()
            .find_map(|c| c.error.clone())
            .unwrap_or_else(|| "no cells evaluated".to_string());
        return Err(SearchError::FailedAllCells(first));
    };
    Ok(SearchReport {
        best_k: cells[best_index].k,
        best_alpha: cells[best_index].alpha,
        best_index,
        cells,
        stop_reason,
    })
}

/// Sequential search over the row-major grid, stopping early per `stop`.
/// The split must already be fixed so every cell sees the same partition.
pub fn optivmd_search<S: Scorer + ?Sized>(
    dataset: &LabeledDataset,
    k_grid: &[usize],
    alpha_grid: &[f64],
    scorer: &S,
    stop: &StopRule,
    clock: &dyn Clock,
) -> Result<SearchReport, SearchError> {
    if k_grid.is_empty() {
        return Err(SearchError::EmptyGrid("K"));
    }
    if alpha_grid.is_empty() {
        return Err(SearchError::EmptyGrid("alpha"));
    }
    stop.validate()?;
    dataset.check_split()?;
    let grid = grid_cells(k_grid, alpha_grid);
    let mut tracker = StopTracker::new(*stop);
    let mut cells = Vec::with_capacity(grid.len());
    let mut reason = StopReason::GridExhausted;
    for (i, &(k, alpha)) in grid.iter().enumerate() {
        let cell = evaluate_cell(dataset, k, alpha, scorer, clock);
        let r = tracker.observe(&cell);
        cells.push(cell);
        if let Some(r) = r {
            if i + 1 < grid.len() {
                reason = r;
                break;
            }
        }
    }
    finish(cells, reason)
}
