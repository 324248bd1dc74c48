//! Labeled feature-map collections, stratified splitting and SMOTE balancing.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::FeatureMap;
use crate::math::round;
use crate::signal::EmotionLabel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("class {class:?} has {count} item(s); at least 2 are needed")]
    ClassTooSmall { class: String, count: usize },
    #[error("{maps} maps but {labels} labels")]
    LengthMismatch { maps: usize, labels: usize },
    #[error("label {label} outside the class table of size {classes}")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("test fraction must lie strictly between 0 and 1")]
    BadFraction,
    #[error("k_neighbors must be at least 1")]
    BadNeighbors,
    #[error("maps differ in shape")]
    ShapeMismatch,
    #[error("dataset has no {0} items")]
    EmptyPartition(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SplitTag {
    Train,
    Test,
}

impl SplitTag {
    pub fn name(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Test => "test",
        }
    }
}

/// Feature maps with class indices into `class_names` and optional split tags.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub maps: Vec<FeatureMap>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub split: Vec<Option<SplitTag>>,
}

impl LabeledDataset {
    pub fn new(
        maps: Vec<FeatureMap>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self, DatasetError> {
        if maps.len() != labels.len() {
            return Err(DatasetError::LengthMismatch {
                maps: maps.len(),
                labels: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(DatasetError::LabelOutOfRange {
                label,
                classes: class_names.len(),
            });
        }
        if let Some(first) = maps.first() {
            if maps.iter().any(|m| m.shape() != first.shape()) {
                return Err(DatasetError::ShapeMismatch);
            }
        }
        let split = vec![None; maps.len()];
        Ok(Self {
            maps,
            labels,
            class_names,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn label(&self, i: usize) -> EmotionLabel {
        EmotionLabel {
            class_index: self.labels[i],
            class_name: self.class_names[self.labels[i]].clone(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Indices carrying the given tag.
    pub fn indices(&self, tag: SplitTag) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.split[i] == Some(tag)).collect()
    }

    /// The items carrying `tag`, with the tags kept.
    pub fn partition(&self, tag: SplitTag) -> LabeledDataset {
        self.select(&self.indices(tag))
    }

    pub fn select(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            maps: idx.iter().map(|&i| self.maps[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            split: idx.iter().map(|&i| self.split[i]).collect(),
        }
    }

    /// Apply `f` to every map, keeping labels and tags.
    pub fn map_maps<E>(&self, mut f: impl FnMut(&FeatureMap) -> Result<FeatureMap, E>) -> Result<Self, E> {
        Ok(LabeledDataset {
            maps: self.maps.iter().map(&mut f).collect::<Result<_, _>>()?,
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
            split: self.split.clone(),
        })
    }

    pub fn append(&mut self, other: LabeledDataset) {
        self.maps.extend(other.maps);
        self.labels.extend(other.labels);
        self.split.extend(other.split);
    }

    /// Train and test must both be non-empty and every class with items must
    /// appear in train.
    pub fn check_split(&self) -> Result<(), DatasetError> {
        let train = self.indices(SplitTag::Train);
        if train.is_empty() {
            return Err(DatasetError::EmptyPartition("train"));
        }
        if self.indices(SplitTag::Test).is_empty() {
            return Err(DatasetError::EmptyPartition("test"));
        }
        Ok(())
    }
}

/// Number of test items taken from a class of `size` items: `round(f * size)`,
/// capped so at least one item stays in train.
pub fn test_count(size: usize, test_fraction: f64) -> usize {
    (round(test_fraction * size as f64) as usize).min(size.saturating_sub(1))
}

/// Stratified split: per class, a seeded shuffle assigns `test_count` items to test.
pub fn split(dataset: &LabeledDataset, test_fraction: f64, seed: u64) -> Result<LabeledDataset, DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::BadFraction);
    }
    let mut out = dataset.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (class, name) in dataset.class_names.iter().enumerate() {
        let mut idx: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels[i] == class).collect();
        match idx.len() {
            0 => continue,
            1 => {
                return Err(DatasetError::ClassTooSmall {
                    class: name.clone(),
                    count: 1,
                })
            }
            _ => {}
        }
        idx.shuffle(&mut rng);
        let n_test = test_count(idx.len(), test_fraction);
        for (j, &i) in idx.iter().enumerate() {
            out.split[i] = Some(if j < n_test { SplitTag::Test } else { SplitTag::Train });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoteParams {
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for SmoteParams {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            seed: 0,
        }
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

/// Oversample every class up to the majority count. Originals are kept
/// verbatim and in order; synthetic items are appended class by class and
/// inherit the tag of the item they were interpolated from.
pub fn smote_balance(dataset: &LabeledDataset, params: &SmoteParams) -> Result<LabeledDataset, DatasetError> {
    if params.k_neighbors == 0 {
        return Err(DatasetError::BadNeighbors);
    }
    let counts = dataset.class_counts();
    let majority = counts.iter().copied().max().unwrap_or(0);
    let mut out = dataset.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for (class, &count) in counts.iter().enumerate() {
        if count == 0 || count == majority {
            continue;
        }
        if count == 1 {
            return Err(DatasetError::ClassTooSmall {
                class: dataset.class_names[class].clone(),
                count,
            });
        }
        let members: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels[i] == class).collect();
        let k = params.k_neighbors.min(count - 1);
        let neighbors: Vec<Vec<usize>> = members
            .iter()
            .map(|&i| {
                let mut d: Vec<(f64, usize)> = members
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (sq_dist(&dataset.maps[i].data, &dataset.maps[j].data), j))
                    .collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                d.into_iter().take(k).map(|(_, j)| j).collect()
            })
            .collect();
        for _ in 0..majority - count {
            let pick = rng.random_range(0..members.len());
            let x = &dataset.maps[members[pick]];
            let nn = &dataset.maps[neighbors[pick][rng.random_range(0..k)]];
            let u = loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    break u;
                }
            };
            let mut synth = x.clone();
            for (s, (a, b)) in synth.data.iter_mut().zip(x.data.iter().zip(&nn.data)) {
                let (a, b) = (*a as f64, *b as f64);
                *s = (a + u * (b - a)) as f32;
            }
            out.maps.push(synth);
            out.labels.push(class);
            out.split.push(dataset.split[members[pick]]);
        }
    }
    Ok(out)
}

/// SMOTE on the train partition only; test items are left untouched.
pub fn balance_training(dataset: &LabeledDataset, params: &SmoteParams) -> Result<LabeledDataset, DatasetError> {
    let train = dataset.partition(SplitTag::Train);
    let balanced = smote_balance(&train, params)?;
    let mut out = balanced;
    out.append(dataset.partition(SplitTag::Test));
    Ok(out)
}
