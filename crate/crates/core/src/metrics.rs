//! Confusion matrix, accuracy and macro-F1.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("{predictions} predictions for {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("no samples to score")]
    Empty,
    #[error("label {label} outside 0..{classes}")]
    LabelOutOfRange { label: usize, classes: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    /// `confusion[truth][prediction]`.
    pub confusion: Vec<Vec<u64>>,
}

impl EvalReport {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// F1 per class, 0 where precision or recall is undefined.
    pub fn per_class_f1(&self) -> Vec<f64> {
        per_class_f1(&self.confusion)
    }

    /// Rebuild accuracy and macro-F1 from a confusion matrix.
    pub fn from_confusion(confusion: Vec<Vec<u64>>) -> Self {
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..confusion.len()).map(|i| confusion[i][i]).sum();
        let f1 = per_class_f1(&confusion);
        let macro_f1 = if f1.is_empty() {
            0.0
        } else {
            f1.iter().sum::<f64>() / f1.len() as f64
        };
        Self {
            accuracy: if total == 0 { 0.0 } else { trace as f64 / total as f64 },
            macro_f1,
            confusion,
        }
    }
}

fn per_class_f1(confusion: &[Vec<u64>]) -> Vec<f64> {
    let c = confusion.len();
    (0..c)
        .map(|k| {
            let tp = confusion[k][k];
            let fn_: u64 = confusion[k].iter().sum::<u64>() - tp;
            let fp: u64 = (0..c).map(|i| confusion[i][k]).sum::<u64>() - tp;
            if tp == 0 {
                0.0
            } else {
                2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
            }
        })
        .collect()
}

pub fn metrics(predictions: &[usize], truths: &[usize], classes: usize) -> Result<EvalReport, MetricsError> {
    if predictions.len() != truths.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if truths.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut confusion = vec![vec![0u64; classes]; classes];
    for (&p, &t) in predictions.iter().zip(truths) {
        for label in [p, t] {
            if label >= classes {
                return Err(MetricsError::LabelOutOfRange { label, classes });
            }
        }
        confusion[t][p] += 1;
    }
    Ok(EvalReport::from_confusion(confusion))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let r = metrics(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.confusion, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn hand_computed_two_class_case() {
        let r = metrics(&[0, 1, 1, 1], &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(r.accuracy, 0.75);
        let f1 = r.per_class_f1();
        assert!((f1[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((f1[1] - 0.8).abs() < 1e-15);
        assert!((r.macro_f1 - 0.7333).abs() < 5e-5);
    }

    #[test]
    fn absent_class_counts_as_zero() {
        let r = metrics(&[0, 1], &[0, 1], 3).unwrap();
        assert!((r.macro_f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.total(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(metrics(&[0], &[0, 1], 2), Err(MetricsError::LengthMismatch { .. })));
        assert_eq!(metrics(&[], &[], 2), Err(MetricsError::Empty));
        assert!(matches!(metrics(&[3], &[0], 2), Err(MetricsError::LabelOutOfRange { .. })));
    }
}
