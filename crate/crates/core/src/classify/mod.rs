//! Binary probabilistic classifiers behind one prediction interface:
//! logistic regression, Gaussian naive Bayes and a three-layer perceptron.

mod logistic;
mod mlp;
mod naive_bayes;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub use logistic::{lr_gradient, lr_objective, lr_predict_proba, lr_train, LrConfig, LrModel};
pub use mlp::{mlp_predict_proba, mlp_train, relu, MlpConfig, MlpGradients, MlpModel};
pub use naive_bayes::{gnb_predict_proba, gnb_train, GnbModel, DEFAULT_VAR_FLOOR_RATIO};

/// One scored example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probability: f64,
    pub label: u8,
}

/// Any trained classifier, dispatched by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedClassifier {
    Lr(LrModel),
    Gnb(GnbModel),
    Mlp(MlpModel),
}

impl TrainedClassifier {
    /// Probability of the positive class per row; deterministic, no
    /// dropout at inference.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        match self {
            TrainedClassifier::Lr(m) => lr_predict_proba(m, x),
            TrainedClassifier::Gnb(m) => gnb_predict_proba(m, x),
            TrainedClassifier::Mlp(m) => mlp_predict_proba(m, x),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TrainedClassifier::Lr(_) => "lr",
            TrainedClassifier::Gnb(_) => "gnb",
            TrainedClassifier::Mlp(_) => "mlp",
        }
    }
}

/// Threshold probabilities: label 1 iff `p >= threshold`.
pub fn predict_label(probabilities: &[f64], threshold: f64) -> Result<Vec<u8>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::config(format!(
            "threshold must lie in (0,1), got {threshold}"
        )));
    }
    Ok(probabilities
        .iter()
        .map(|&p| u8::from(p >= threshold))
        .collect())
}

/// Per-class weights `n / (2 n_c)`, the prior-rebalancing alternative to
/// resampling. With `balanced = false` both weights are 1.
pub fn class_weights(y: &[u8], balanced: bool) -> [f64; 2] {
    if !balanced {
        return [1.0, 1.0];
    }
    let n = y.len() as f64;
    let n_pos = y.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = n - n_pos;
    [n / (2.0 * n_neg.max(1.0)), n / (2.0 * n_pos.max(1.0))]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_threshold_at_or_above() {
        assert_eq!(predict_label(&[0.4, 0.6], 0.5).unwrap(), vec![0, 1]);
        assert_eq!(predict_label(&[0.5], 0.5).unwrap(), vec![1]);
        assert_eq!(predict_label(&[], 0.5).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn out_of_range_threshold_is_rejected() {
        assert!(predict_label(&[0.5], 0.0).is_err());
        assert!(predict_label(&[0.5], 1.0).is_err());
    }

    #[test]
    fn balanced_weights_invert_class_frequencies() {
        let y = vec![1, 0, 0, 0];
        let w = class_weights(&y, true);
        assert_eq!(w, [4.0 / 6.0, 2.0]);
        assert_eq!(class_weights(&y, false), [1.0, 1.0]);
    }
}
