//! Classifiers that turn a split dataset into an [`EvalReport`].
//!
//! Two native scorers ship here: multinomial logistic regression trained by
//! mini-batch gradient descent, and k-nearest-neighbours. External scorers
//! (a subprocess running a real network) implement the same [`Scorer`] trait
//! outside this crate.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DatasetError, LabeledDataset, SplitTag};
use crate::math::{exp, ln, sqrt};
use crate::metrics::{metrics, EvalReport, MetricsError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScorerError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("invalid scorer parameter {field}: {reason}")]
    InvalidParams {
        field: &'static str,
        reason: &'static str,
    },
    #[error("training diverged (non-finite loss)")]
    NonFinite,
    #[error("external scorer failed: {0}")]
    ExternalScorerFailed(String),
    #[error("{0} scorer is not available here")]
    Unsupported(&'static str),
}

/// Trains on the `train` partition and reports on `test`.
pub trait Scorer {
    fn train_eval(&self, dataset: &LabeledDataset) -> Result<EvalReport, ScorerError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SoftmaxConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for SoftmaxConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 60,
            batch: 16,
            l2: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExternalConfig {
    pub command: String,
    pub timeout_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum ScorerSpec {
    Softmax(SoftmaxConfig),
    Knn(KnnConfig),
    External(ExternalConfig),
}

impl Default for ScorerSpec {
    fn default() -> Self {
        ScorerSpec::Softmax(SoftmaxConfig::default())
    }
}

impl ScorerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ScorerSpec::Softmax(_) => "softmax",
            ScorerSpec::Knn(_) => "knn",
            ScorerSpec::External(_) => "external",
        }
    }
}

impl Scorer for ScorerSpec {
    fn train_eval(&self, dataset: &LabeledDataset) -> Result<EvalReport, ScorerError> {
        match self {
            ScorerSpec::Softmax(c) => c.train_eval(dataset),
            ScorerSpec::Knn(c) => c.train_eval(dataset),
            ScorerSpec::External(_) => Err(ScorerError::Unsupported("external")),
        }
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn train_eval(&self, dataset: &LabeledDataset) -> Result<EvalReport, ScorerError> {
        (**self).train_eval(dataset)
    }
}

/// Linear softmax classifier, weights `classes x dim` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    pub classes: usize,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

fn log_softmax_into(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + ln(logits.iter().map(|z| exp(z - max)).sum::<f64>());
    logits.iter_mut().for_each(|z| *z -= lse);
}

impl SoftmaxModel {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Self {
            classes,
            dim,
            weights: vec![0.0; classes * dim],
            bias: vec![0.0; classes],
        }
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.classes)
            .map(|c| {
                let row = &self.weights[c * self.dim..(c + 1) * self.dim];
                self.bias[c] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let z = self.logits(x);
        let mut best = 0;
        for (c, v) in z.iter().enumerate() {
            if *v > z[best] {
                best = c;
            }
        }
        best
    }

    /// Mean cross-entropy over `(xs, ys)` plus `l2 / 2 * |W|^2`, with the
    /// gradient as `(d weights, d bias)`.
    pub fn loss_and_grad(&self, xs: &[&[f64]], ys: &[usize], l2: f64) -> (f64, Vec<f64>, Vec<f64>) {
        let n = xs.len().max(1) as f64;
        let mut gw = vec![0.0; self.weights.len()];
        let mut gb = vec![0.0; self.classes];
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let mut z = self.logits(x);
            log_softmax_into(&mut z);
            loss -= z[y];
            for c in 0..self.classes {
                let d = (exp(z[c]) - if c == y { 1.0 } else { 0.0 }) / n;
                gb[c] += d;
                let row = &mut gw[c * self.dim..(c + 1) * self.dim];
                for (g, v) in row.iter_mut().zip(x.iter()) {
                    *g += d * v;
                }
            }
        }
        loss /= n;
        let mut reg = 0.0;
        for (g, w) in gw.iter_mut().zip(&self.weights) {
            reg += w * w;
            *g += l2 * w;
        }
        (loss + 0.5 * l2 * reg, gw, gb)
    }

    /// Mini-batch gradient descent from zero weights. Returns the model and the
    /// full-data loss before each epoch and after the last one.
    pub fn fit(
        xs: &[&[f64]],
        ys: &[usize],
        classes: usize,
        config: &SoftmaxConfig,
    ) -> Result<(Self, Vec<f64>), ScorerError> {
        if config.batch == 0 {
            return Err(ScorerError::InvalidParams {
                field: "batch",
                reason: "must be at least 1",
            });
        }
        if !(config.learning_rate > 0.0 && config.l2 >= 0.0) {
            return Err(ScorerError::InvalidParams {
                field: "learning_rate",
                reason: "learning rate must be positive and l2 non-negative",
            });
        }
        let dim = xs.first().map_or(0, |x| x.len());
        let mut model = Self::zeros(classes, dim);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let mut history = Vec::with_capacity(config.epochs + 1);
        let mut bx: Vec<&[f64]> = Vec::with_capacity(config.batch);
        let mut by: Vec<usize> = Vec::with_capacity(config.batch);
        for _ in 0..config.epochs {
            history.push(model.loss_and_grad(xs, ys, config.l2).0);
            order.shuffle(&mut rng);
            for chunk in order.chunks(config.batch) {
                bx.clear();
                by.clear();
                for &i in chunk {
                    bx.push(xs[i]);
                    by.push(ys[i]);
                }
                let (loss, gw, gb) = model.loss_and_grad(&bx, &by, config.l2);
                if !loss.is_finite() {
                    return Err(ScorerError::NonFinite);
                }
                for (w, g) in model.weights.iter_mut().zip(&gw) {
                    *w -= config.learning_rate * g;
                }
                for (b, g) in model.bias.iter_mut().zip(&gb) {
                    *b -= config.learning_rate * g;
                }
            }
        }
        let last = model.loss_and_grad(xs, ys, config.l2).0;
        if !last.is_finite() {
            return Err(ScorerError::NonFinite);
        }
        history.push(last);
        Ok((model, history))
    }
}

fn split_indices(dataset: &LabeledDataset) -> Result<(Vec<usize>, Vec<usize>), ScorerError> {
    dataset.check_split()?;
    Ok((dataset.indices(SplitTag::Train), dataset.indices(SplitTag::Test)))
}

/// Inputs are flattened maps, centered on the train mean and divided by the
/// root-mean-square train norm, so the average train input has unit length and
/// one learning rate works across map sizes and contrasts.
pub fn softmax_inputs(dataset: &LabeledDataset, train: &[usize], all: &[usize]) -> Vec<Vec<f64>> {
    let dim = dataset.maps.first().map_or(0, |m| m.data.len());
    let mut mean = vec![0.0; dim];
    for &i in train {
        for (m, v) in mean.iter_mut().zip(&dataset.maps[i].data) {
            *m += *v as f64;
        }
    }
    let n = train.len().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    let centered = |i: usize| -> Vec<f64> {
        dataset.maps[i]
            .data
            .iter()
            .zip(&mean)
            .map(|(v, m)| *v as f64 - m)
            .collect()
    };
    let sq: f64 = train
        .iter()
        .map(|&i| centered(i).iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / n;
    let scale = if sq > 0.0 { 1.0 / sqrt(sq) } else { 1.0 };
    all.iter()
        .map(|&i| centered(i).into_iter().map(|v| v * scale).collect())
        .collect()
}

impl Scorer for SoftmaxConfig {
    fn train_eval(&self, dataset: &LabeledDataset) -> Result<EvalReport, ScorerError> {
        let (train, test) = split_indices(dataset)?;
        let xs_train = softmax_inputs(dataset, &train, &train);
        let xs_test = softmax_inputs(dataset, &train, &test);
        let refs: Vec<&[f64]> = xs_train.iter().map(|x| x.as_slice()).collect();
        let ys: Vec<usize> = train.iter().map(|&i| dataset.labels[i]).collect();
        let (model, _) = SoftmaxModel::fit(&refs, &ys, dataset.n_classes(), self)?;
        let preds: Vec<usize> = xs_test.iter().map(|x| model.predict(x)).collect();
        let truths: Vec<usize> = test.iter().map(|&i| dataset.labels[i]).collect();
        Ok(metrics(&preds, &truths, dataset.n_classes())?)
    }
}

fn sq_dist(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = *x as f64 - *y as f64;
            d * d
        })
        .sum()
}

/// Majority vote among the `k` nearest train maps. Ties go to the class whose
/// closest voter is nearest.
pub fn knn_predict(dataset: &LabeledDataset, train: &[usize], query: &[f32], k: usize) -> usize {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .map(|&j| (sq_dist(query, &dataset.maps[j].data), j))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; dataset.n_classes()];
    let mut first_seen = vec![usize::MAX; dataset.n_classes()];
    for (rank, &(_, j)) in d.iter().take(k).enumerate() {
        let c = dataset.labels[j];
        votes[c] += 1;
        first_seen[c] = first_seen[c].min(rank);
    }
    (0..votes.len())
        .max_by(|&a, &b| votes[a].cmp(&votes[b]).then(first_seen[b].cmp(&first_seen[a])))
        .unwrap_or(0)
}

impl Scorer for KnnConfig {
    fn train_eval(&self, dataset: &LabeledDataset) -> Result<EvalReport, ScorerError> {
        if self.k == 0 {
            return Err(ScorerError::InvalidParams {
                field: "k",
                reason: "must be at least 1",
            });
        }
        let (train, test) = split_indices(dataset)?;
        let preds: Vec<usize> = test
            .iter()
            .map(|&i| knn_predict(dataset, &train, &dataset.maps[i].data, self.k))
            .collect();
        let truths: Vec<usize> = test.iter().map(|&i| dataset.labels[i]).collect();
        Ok(metrics(&preds, &truths, dataset.n_classes())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureMap;
    use alloc::string::ToString;
    use rand::Rng;

    fn blob_dataset(means: &[f32], per_class: usize, spread: f32, seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut maps = Vec::new();
        let mut labels = Vec::new();
        for (c, &m) in means.iter().enumerate() {
            for _ in 0..per_class {
                let data: Vec<f32> = (0..16)
                    .map(|_| (m + spread * (rng.random::<f32>() - 0.5)).clamp(0.0, 1.0))
                    .collect();
                maps.push(FeatureMap::new(4, 4, vec!["mel".to_string()], data).unwrap());
                labels.push(c);
            }
        }
        let names = (0..means.len()).map(|c| alloc::format!("c{c}")).collect();
        let ds = LabeledDataset::new(maps, labels, names).unwrap();
        crate::dataset::split(&ds, 0.25, seed).unwrap()
    }

    #[test]
    fn separable_classes_are_learned() {
        let ds = blob_dataset(&[0.2, 0.8], 20, 0.2, 1);
        let r = SoftmaxConfig::default().train_eval(&ds).unwrap();
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn knn_self_match() {
        let mut ds = blob_dataset(&[0.3, 0.5, 0.7], 6, 0.6, 2);
        // test items duplicated into train
        let test = ds.partition(SplitTag::Test);
        let mut copy = test.clone();
        copy.split.iter_mut().for_each(|s| *s = Some(SplitTag::Train));
        ds.append(copy);
        let r = KnnConfig { k: 1 }.train_eval(&ds).unwrap();
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn full_batch_loss_does_not_increase() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<Vec<f64>> = (0..40).map(|_| (0..8).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
        let ys: Vec<usize> = (0..40).map(|i| i % 3).collect();
        let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
        let cfg = SoftmaxConfig {
            learning_rate: 0.01,
            epochs: 50,
            batch: 40,
            l2: 1e-3,
            seed: 0,
        };
        let (_, hist) = SoftmaxModel::fit(&refs, &ys, 3, &cfg).unwrap();
        assert!(hist.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn external_needs_a_host() {
        let ds = blob_dataset(&[0.2, 0.8], 4, 0.1, 3);
        let spec = ScorerSpec::External(ExternalConfig {
            command: "true".to_string(),
            timeout_s: 1.0,
        });
        assert_eq!(spec.train_eval(&ds), Err(ScorerError::Unsupported("external")));
    }
}
