//! Scoring through a user-supplied subprocess.
//!
//! The command is run as `<command> --train <train.csv> --test <test.csv>`,
//! where both manifests point at FMAP files in a scratch directory. It must
//! print one JSON object `{"accuracy", "macro_f1", "confusion"}` on stdout and
//! exit with status 0 before the timeout. The command line is split on
//! whitespace; no shell quoting is interpreted.

use std::io::Read;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use optivmd_core::dataset::{LabeledDataset, SplitTag};
use optivmd_core::metrics::EvalReport;
use optivmd_core::scorer::{ExternalConfig, Scorer, ScorerError, ScorerSpec};
use serde::Deserialize;

use crate::manifest::save_dataset;

#[derive(Debug, Deserialize)]
struct Reply {
    accuracy: f64,
    macro_f1: f64,
    confusion: Vec<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct ExternalScorer {
    pub config: ExternalConfig,
}

fn fail(msg: impl Into<String>) -> ScorerError {
    ScorerError::ExternalScorerFailed(msg.into())
}

/// Validate a reply against the test partition it should describe.
pub fn parse_reply(stdout: &str, classes: usize, test_size: usize) -> Result<EvalReport, ScorerError> {
    let reply: Reply = serde_json::from_str(stdout.trim()).map_err(|e| fail(format!("malformed output: {e}")))?;
    for (name, v) in [("accuracy", reply.accuracy), ("macro_f1", reply.macro_f1)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(fail(format!("{name} {v} outside [0, 1]")));
        }
    }
    if reply.confusion.len() != classes || reply.confusion.iter().any(|r| r.len() != classes) {
        return Err(fail(format!("confusion matrix is not {classes} x {classes}")));
    }
    let total: u64 = reply.confusion.iter().flatten().sum();
    if total != test_size as u64 {
        return Err(fail(format!("confusion counts {total} items, test split has {test_size}")));
    }
    Ok(EvalReport {
        accuracy: reply.accuracy,
        macro_f1: reply.macro_f1,
        confusion: reply.confusion,
    })
}

impl ExternalScorer {
    pub fn new(config: ExternalConfig) -> Self {
        Self { config }
    }

    fn run(&self, train: &std::path::Path, test: &std::path::Path) -> Result<String, ScorerError> {
        let mut parts = self.config.command.split_whitespace();
        let program = parts.next().ok_or_else(|| fail("empty command"))?;
        let mut child = Command::new(program)
            .args(parts)
            .arg("--train")
            .arg(train)
            .arg("--test")
            .arg(test)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| fail(format!("cannot start {program:?}: {e}")))?;
        let mut out = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            out.read_to_string(&mut s).map(|_| s)
        });
        let deadline = Instant::now() + Duration::from_secs_f64(self.config.timeout_s);
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(fail(format!("timed out after {} s", self.config.timeout_s)));
                }
                Ok(None) => std::thread::sleep(Duration::from_millis(10)),
                Err(e) => return Err(fail(e.to_string())),
            }
        };
        let stdout = reader
            .join()
            .map_err(|_| fail("stdout reader panicked"))?
            .map_err(|e| fail(format!("reading stdout: {e}")))?;
        if !status.success() {
            return Err(fail(format!("exited with {status}")));
        }
        Ok(stdout)
    }
}

impl Scorer for ExternalScorer {
    fn train_eval(&self, dataset: &LabeledDataset) -> Result<EvalReport, ScorerError> {
        dataset.check_split()?;
        let dir = tempfile::tempdir().map_err(|e| fail(format!("scratch dir: {e}")))?;
        let train = dataset.partition(SplitTag::Train);
        let test = dataset.partition(SplitTag::Test);
        let io = |e: crate::manifest::ManifestError| fail(format!("writing maps: {e}"));
        let train_csv = save_dataset(&train, &dir.path().join("train"), "train_", "manifest.csv").map_err(io)?;
        let test_csv = save_dataset(&test, &dir.path().join("test"), "test_", "manifest.csv").map_err(io)?;
        let stdout = self.run(&train_csv, &test_csv)?;
        parse_reply(&stdout, dataset.n_classes(), test.len())
    }
}

/// A scorer for any spec: native ones run in-process, external ones as a subprocess.
pub enum AnyScorer {
    Native(ScorerSpec),
    External(ExternalScorer),
}

impl AnyScorer {
    pub fn from_spec(spec: &ScorerSpec) -> Self {
        match spec {
            ScorerSpec::External(c) => AnyScorer::External(ExternalScorer::new(c.clone())),
            other => AnyScorer::Native(other.clone()),
        }
    }
}

impl Scorer for AnyScorer {
    fn train_eval(&self, dataset: &LabeledDataset) -> Result<EvalReport, ScorerError> {
        match self {
            AnyScorer::Native(s) => s.train_eval(dataset),
            AnyScorer::External(s) => s.train_eval(dataset),
        }
    }
}
