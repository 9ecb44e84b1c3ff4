//! Gaussian naive Bayes: class priors from relative frequencies, one
//! Gaussian per class and feature with population variance, floored to keep
//! constant features from collapsing the density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const DEFAULT_VAR_FLOOR_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    /// `priors[c] = p(y = c)`.
    pub priors: [f64; 2],
    /// Per-class feature means, `means[c][j]`.
    pub means: [Vec<f64>; 2],
    /// Per-class feature variances, floored at `var_floor`.
    pub variances: [Vec<f64>; 2],
    pub var_floor: f64,
    pub var_floor_ratio: f64,
}

/// Estimate priors, means and variances per class.
pub fn gnb_train(x: &FeatureMatrix, y: &[u8], var_floor_ratio: f64) -> Result<GnbModel> {
    let (n, d) = x.shape();
    if y.len() != n {
        return Err(Error::Mismatch {
            expected: n,
            got: y.len(),
        });
    }
    let n_pos = y.iter().filter(|&&l| l == 1).count();
    if n_pos == 0 || n_pos == n {
        return Err(Error::config("training needs both classes present"));
    }
    if !(var_floor_ratio > 0.0) {
        return Err(Error::config("var_floor_ratio must be positive"));
    }

    let counts = [n - n_pos, n_pos];
    let mut sums = [vec![0.0; d], vec![0.0; d]];
    let mut square_sums = [vec![0.0; d], vec![0.0; d]];
    let mut buf = vec![0.0; d];
    let mut total_sum = vec![0.0; d];
    let mut total_square = vec![0.0; d];
    for i in 0..n {
        x.copy_row_dense(i, &mut buf);
        let c = y[i] as usize;
        for j in 0..d {
            sums[c][j] += buf[j];
            square_sums[c][j] += buf[j] * buf[j];
            total_sum[j] += buf[j];
            total_square[j] += buf[j] * buf[j];
        }
    }

    // Floor: ratio of the largest whole-data feature variance.
    let max_var = (0..d)
        .map(|j| {
            let mean = total_sum[j] / n as f64;
            (total_square[j] / n as f64 - mean * mean).max(0.0)
        })
        .fold(0.0f64, f64::max);
    let var_floor = if max_var > 0.0 {
        var_floor_ratio * max_var
    } else {
        var_floor_ratio
    };

    let mut means = [vec![0.0; d], vec![0.0; d]];
    let mut variances = [vec![0.0; d], vec![0.0; d]];
    for c in 0..2 {
        let m = counts[c] as f64;
        for j in 0..d {
            means[c][j] = sums[c][j] / m;
            let var = (square_sums[c][j] / m - means[c][j] * means[c][j]).max(0.0);
            variances[c][j] = var.max(var_floor);
        }
    }

    Ok(GnbModel {
        priors: [counts[0] as f64 / n as f64, counts[1] as f64 / n as f64],
        means,
        variances,
        var_floor,
        var_floor_ratio,
    })
}

fn log_joint(model: &GnbModel, xs: &[f64], class: usize) -> f64 {
    let mut log_p = model.priors[class].ln();
    for ((&x, &mean), &var) in xs
        .iter()
        .zip(&model.means[class])
        .zip(&model.variances[class])
    {
        let diff = x - mean;
        log_p += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - diff * diff / (2.0 * var);
    }
    log_p
}

/// Normalized posterior `p(y = 1 | x)` per row.
pub fn gnb_predict_proba(model: &GnbModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    let d = model.means[0].len();
    x.ensure_width(d)?;
    let mut buf = vec![0.0; d];
    Ok((0..x.n_rows())
        .map(|i| {
            x.copy_row_dense(i, &mut buf);
            let log0 = log_joint(model, &buf, 0);
            let log1 = log_joint(model, &buf, 1);
            let max = log0.max(log1);
            let e0 = (log0 - max).exp();
            let e1 = (log1 - max).exp();
            e1 / (e0 + e1)
        })
        .collect())
}
