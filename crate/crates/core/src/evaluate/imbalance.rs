//! Bayes imbalance impact index.
//!
//! For each minority (positive) sample with posterior scores `f_p`, `f_n`,
//! the individual index compares the rebalanced posterior against the raw
//! one:
//!
//! `IBI3 = f'_p / (f_n + f'_p) - f_p / (f_n + f_p)` with
//! `f'_p = f_p * (N_n / N_p)`.
//!
//! The dataset-level index is the mean over positive samples. A perfectly
//! balanced dataset has ratio 1, so every individual index is exactly zero.

use serde::{Deserialize, Serialize};

use crate::classify::{gnb_predict_proba, gnb_train};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

/// Density model used to estimate the class posterior scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PosteriorEstimator {
    Gnb { var_floor_ratio: f64 },
}

impl Default for PosteriorEstimator {
    fn default() -> Self {
        PosteriorEstimator::Gnb {
            var_floor_ratio: crate::classify::DEFAULT_VAR_FLOOR_RATIO,
        }
    }
}

impl PosteriorEstimator {
    fn describe(&self) -> String {
        match self {
            PosteriorEstimator::Gnb { var_floor_ratio } => {
                format!("gaussian_nb(var_floor_ratio={var_floor_ratio:e})")
            }
        }
    }
}

/// Individual index for one sample. `None` when both scores vanish.
pub fn ibi3(f_p: f64, f_n: f64, imbalance_ratio: f64) -> Option<f64> {
    debug_assert!(f_p >= 0.0 && f_n >= 0.0 && imbalance_ratio > 0.0);
    if f_p == 0.0 && f_n == 0.0 {
        return None;
    }
    let rebalanced = f_p * imbalance_ratio;
    Some(rebalanced / (f_n + rebalanced) - f_p / (f_n + f_p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bi3Report {
    /// One entry per positive sample, in corpus order.
    pub per_sample: Vec<Option<f64>>,
    /// Mean of the defined individual values.
    pub aggregate: Option<f64>,
    pub n_positive: usize,
    pub n_negative: usize,
    pub imbalance_ratio: f64,
    pub estimator: String,
}

/// Aggregate individual indices from precomputed posterior scores of the
/// positive samples.
pub fn bi3_from_posteriors(
    posteriors: &[(f64, f64)],
    n_positive: usize,
    n_negative: usize,
    estimator: String,
) -> Bi3Report {
    let ratio = n_negative as f64 / n_positive as f64;
    let per_sample: Vec<Option<f64>> = posteriors
        .iter()
        .map(|&(f_p, f_n)| ibi3(f_p, f_n, ratio))
        .collect();
    let defined: Vec<f64> = per_sample.iter().filter_map(|v| *v).collect();
    let aggregate = (!defined.is_empty())
        .then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Bi3Report {
        per_sample,
        aggregate,
        n_positive,
        n_negative,
        imbalance_ratio: ratio,
        estimator,
    }
}

/// Fit the posterior estimator on `(x, y)` and measure the imbalance impact
/// on every positive sample.
pub fn bi3(x: &FeatureMatrix, y: &[u8], estimator: PosteriorEstimator) -> Result<Bi3Report> {
    let n_positive = y.iter().filter(|&&l| l == 1).count();
    let n_negative = y.len() - n_positive;
    if n_positive == 0 || n_negative == 0 {
        return Err(Error::config(
            "imbalance index needs both classes present",
        ));
    }
    let probabilities = match estimator {
        PosteriorEstimator::Gnb { var_floor_ratio } => {
            let model = gnb_train(x, y, var_floor_ratio)?;
            gnb_predict_proba(&model, x)?
        }
    };
    let posteriors: Vec<(f64, f64)> = probabilities
        .iter()
        .zip(y)
        .filter(|(_, &label)| label == 1)
        .map(|(&p, _)| (p, 1.0 - p))
        .collect();
    Ok(bi3_from_posteriors(
        &posteriors,
        n_positive,
        n_negative,
        estimator.describe(),
    ))
}
