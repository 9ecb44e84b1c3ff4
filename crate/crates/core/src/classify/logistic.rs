//! Binary logistic regression fitted by full-batch gradient ascent on the
//! L2-penalized log-likelihood. The bias is folded in as weight 0 over an
//! implicit constant feature and stays unpenalized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_penalty: f64,
    pub seed: u64,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            learning_rate: 0.5,
            epochs: 300,
            l2_penalty: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    /// `weights[0]` is the bias; `weights[1 + j]` pairs with feature `j`.
    pub weights: Vec<f64>,
    pub config: LrConfig,
    /// Penalized log-likelihood after each epoch.
    pub objective_history: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn ln_1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logit(weights: &[f64], x: &FeatureMatrix, row: usize) -> f64 {
    let mut z = weights[0];
    for (j, v) in x.row_nonzeros(row) {
        z += weights[1 + j] * v;
    }
    z
}

/// Penalized log-likelihood `sum_i cw_i [y_i z_i - ln(1 + e^{z_i})] -
/// l2 * |w_{1..}|^2`.
pub fn lr_objective(
    weights: &[f64],
    x: &FeatureMatrix,
    y: &[u8],
    sample_weights: &[f64],
    l2_penalty: f64,
) -> f64 {
    let mut total = 0.0;
    for i in 0..x.n_rows() {
        let z = logit(weights, x, i);
        total += sample_weights[i] * (y[i] as f64 * z - ln_1p_exp(z));
    }
    total - l2_penalty * weights[1..].iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`lr_objective`]: `sum_i cw_i (y_i - p_i) x_i` minus the
/// penalty term on the non-bias weights.
pub fn lr_gradient(
    weights: &[f64],
    x: &FeatureMatrix,
    y: &[u8],
    sample_weights: &[f64],
    l2_penalty: f64,
) -> Vec<f64> {
    let mut grad = vec![0.0; weights.len()];
    for i in 0..x.n_rows() {
        let residual = sample_weights[i] * (y[i] as f64 - sigmoid(logit(weights, x, i)));
        grad[0] += residual;
        for (j, v) in x.row_nonzeros(i) {
            grad[1 + j] += residual * v;
        }
    }
    for (g, w) in grad[1..].iter_mut().zip(&weights[1..]) {
        *g -= 2.0 * l2_penalty * w;
    }
    grad
}

fn expand_class_weights(y: &[u8], class_weights: Option<[f64; 2]>) -> Vec<f64> {
    let cw = class_weights.unwrap_or([1.0, 1.0]);
    y.iter().map(|&label| cw[label as usize]).collect()
}

/// Fit by gradient ascent from zero weights; stops early once the gradient
/// max-norm falls under 1e-6. The step is normalized by the total sample
/// weight so the learning rate is per-sample.
pub fn lr_train(
    x: &FeatureMatrix,
    y: &[u8],
    config: &LrConfig,
    class_weights: Option<[f64; 2]>,
) -> Result<LrModel> {
    let n = x.n_rows();
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
    if config.learning_rate <= 0.0 || config.epochs == 0 {
        return Err(Error::config("learning_rate and epochs must be positive"));
    }

    let sample_weights = expand_class_weights(y, class_weights);
    let weight_total: f64 = sample_weights.iter().sum();
    let mut weights = vec![0.0; 1 + x.n_cols()];
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let grad = lr_gradient(&weights, x, y, &sample_weights, config.l2_penalty);
        let step = config.learning_rate / weight_total;
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w += step * g;
        }
        let objective = lr_objective(&weights, x, y, &sample_weights, config.l2_penalty);
        if !objective.is_finite() {
            return Err(Error::Divergence {
                stage: "logistic_regression",
                epoch,
            });
        }
        history.push(objective);
        let max_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if max_norm < 1e-6 {
            break;
        }
    }

    Ok(LrModel {
        weights,
        config: config.clone(),
        objective_history: history,
    })
}

/// `p(y = 1 | x) = sigmoid(w . x)` per row.
pub fn lr_predict_proba(model: &LrModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    x.ensure_width(model.weights.len() - 1)?;
    Ok((0..x.n_rows())
        .map(|i| sigmoid(logit(&model.weights, x, i)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_predict_one_half() {
        let model = LrModel {
            weights: vec![0.0; 4],
            config: LrConfig::default(),
            objective_history: Vec::new(),
        };
        let x = FeatureMatrix::dense(2, 3, vec![1.0, -2.0, 3.0, 0.0, 5.0, -1.0]);
        let p = lr_predict_proba(&model, &x).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(7);
        let (n, d) = (5, 3);
        let values: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = FeatureMatrix::dense(n, d, values);
        let y = vec![1, 0, 1, 1, 0];
        let sw = vec![1.0, 2.0, 1.0, 0.5, 1.5];
        let l2 = 0.01;
        let mut weights: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let grad = lr_gradient(&weights, &x, &y, &sw, l2);
        let h = 1e-6;
        for k in 0..weights.len() {
            let orig = weights[k];
            weights[k] = orig + h;
            let up = lr_objective(&weights, &x, &y, &sw, l2);
            weights[k] = orig - h;
            let down = lr_objective(&weights, &x, &y, &sw, l2);
            weights[k] = orig;
            let fd = (up - down) / (2.0 * h);
            let denom = grad[k].abs().max(fd.abs()).max(1e-6);
            assert!(
                ((grad[k] - fd) / denom).abs() < 1e-5,
                "weight {k}: analytic {} vs fd {fd}",
                grad[k]
            );
        }
    }

    #[test]
    fn separable_points_reach_perfect_training_accuracy() {
        let x = FeatureMatrix::dense(4, 2, vec![0.0, 0.0, 1.0, 0.0, 3.0, 1.0, 4.0, 1.0]);
        let y = vec![0, 0, 1, 1];
        let config = LrConfig {
            learning_rate: 1.0,
            epochs: 2000,
            l2_penalty: 0.0,
            seed: 0,
        };
        let model = lr_train(&x, &y, &config, None).unwrap();
        let p = lr_predict_proba(&model, &x).unwrap();
        for (pi, &yi) in p.iter().zip(&y) {
            assert_eq!(u8::from(*pi >= 0.5), yi, "p = {p:?}");
        }
    }

    #[test]
    fn uniform_class_weights_match_unweighted_gradient() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(3);
        let x = FeatureMatrix::dense(6, 2, (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let y = vec![0, 1, 0, 1, 1, 0];
        let weights: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let unweighted = lr_gradient(&weights, &x, &y, &vec![1.0; 6], 0.1);
        let uniform = lr_gradient(&weights, &x, &y, &expand_class_weights(&y, Some([1.0, 1.0])), 0.1);
        assert_eq!(unweighted, uniform);
    }

    #[test]
    fn column_permutation_leaves_predictions_unchanged() {
        // Dyadic-rational features keep every sum exact, so the invariance
        // holds bitwise.
        let x = FeatureMatrix::dense(3, 4, vec![
            0.5, 0.25, 1.0, 2.0, //
            1.5, 0.75, 0.5, 0.0, //
            0.0, 2.25, 1.25, 4.0,
        ]);
        let model = LrModel {
            weights: vec![0.25, 0.5, -0.75, 1.25, -0.5],
            config: LrConfig::default(),
            objective_history: Vec::new(),
        };
        let perm = [2usize, 0, 3, 1];
        let mut permuted = vec![0.0; 12];
        for i in 0..3 {
            for (new_j, &old_j) in perm.iter().enumerate() {
                permuted[i * 4 + new_j] = x.get(i, old_j);
            }
        }
        let mut pweights = vec![model.weights[0]; 5];
        for (new_j, &old_j) in perm.iter().enumerate() {
            pweights[1 + new_j] = model.weights[1 + old_j];
        }
        let pmodel = LrModel {
            weights: pweights,
            config: LrConfig::default(),
            objective_history: Vec::new(),
        };
        let original = lr_predict_proba(&model, &x).unwrap();
        let shuffled =
            lr_predict_proba(&pmodel, &FeatureMatrix::dense(3, 4, permuted)).unwrap();
        for (a, b) in original.iter().zip(&shuffled) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn single_class_training_is_rejected() {
        let x = FeatureMatrix::dense(2, 1, vec![1.0, 2.0]);
        assert!(matches!(
            lr_train(&x, &[1, 1], &LrConfig::default(), None).unwrap_err(),
            Error::Config(_)
        ));
    }
}
