//! Evaluation: confusion-matrix metrics, the Bayes imbalance impact index,
//! cross-validated pipeline runs and learning curves.

mod crossval;
mod imbalance;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crossval::{
    audit_vocabulary_leakage, cross_validate, learning_curve, CurvePoint, CvReport, FoldResult,
    LearningCurve,
};
pub use imbalance::{bi3, bi3_from_posteriors, ibi3, Bi3Report, PosteriorEstimator};

/// Binary confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ConfusionCounts {
    pub true_positive: usize,
    pub true_negative: usize,
    pub false_positive: usize,
    pub false_negative: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_positive + self.true_negative + self.false_positive + self.false_negative
    }
}

/// Count prediction outcomes against the truth.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionCounts> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Mismatch {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    let mut counts = ConfusionCounts::default();
    for (&truth, &pred) in y_true.iter().zip(y_pred) {
        match (truth, pred) {
            (1, 1) => counts.true_positive += 1,
            (0, 0) => counts.true_negative += 1,
            (0, 1) => counts.false_positive += 1,
            (1, 0) => counts.false_negative += 1,
            _ => {
                return Err(Error::integrity(format!(
                    "labels must be binary, got ({truth}, {pred})"
                )))
            }
        }
    }
    Ok(counts)
}

/// Accuracy, precision, recall and F1. A zero denominator leaves the metric
/// undefined (`None`), never silently zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn metrics(counts: &ConfusionCounts) -> Metrics {
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let accuracy = ratio(counts.true_positive + counts.true_negative, counts.total());
    let precision = ratio(
        counts.true_positive,
        counts.true_positive + counts.false_positive,
    );
    let recall = ratio(
        counts.true_positive,
        counts.true_positive + counts.false_negative,
    );
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Metrics {
        accuracy,
        precision,
        recall,
        f1,
    }
}
