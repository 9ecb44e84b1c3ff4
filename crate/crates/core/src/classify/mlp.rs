//! Three-layer perceptron for binary classification: a ReLU hidden layer
//! (100 units by default) and a single sigmoid output unit, trained by
//! mini-batch SGD on class-weighted binary cross-entropy with inverted
//! dropout on the hidden activations and Glorot-normal initialization.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Hidden-unit drop probability, applied only during training.
    pub dropout: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_size: 100,
            epochs: 30,
            learning_rate: 0.1,
            batch_size: 32,
            dropout: 0.25,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// hidden_size x input_size, row-major.
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
    pub input_size: usize,
    pub hidden_size: usize,
    pub config: MlpConfig,
    /// Mean training loss per epoch.
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy from the logit, stable for large |z|.
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl MlpModel {
    fn hidden_pre(&self, xs: &[f64]) -> Vec<f64> {
        let (h, d) = (self.hidden_size, self.input_size);
        (0..h)
            .map(|i| {
                let row = &self.hidden_weights[i * d..(i + 1) * d];
                row.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>() + self.hidden_bias[i]
            })
            .collect()
    }

    /// Output logit with dropout disabled.
    pub fn logit(&self, xs: &[f64]) -> f64 {
        let pre = self.hidden_pre(xs);
        pre.iter()
            .zip(&self.output_weights)
            .map(|(&a, w)| relu(a) * w)
            .sum::<f64>()
            + self.output_bias
    }

    /// Class-weighted mean cross-entropy over a batch, dropout disabled.
    pub fn batch_loss(&self, rows: &[Vec<f64>], y: &[u8], sample_weights: &[f64]) -> f64 {
        let total: f64 = rows
            .iter()
            .zip(y)
            .zip(sample_weights)
            .map(|((xs, &yi), &cw)| cw * bce_with_logit(self.logit(xs), yi as f64))
            .sum();
        total / rows.len() as f64
    }

    /// Backpropagated gradients of [`Self::batch_loss`] (dropout disabled
    /// when `masks` is `None`).
    fn gradients(
        &self,
        rows: &[Vec<f64>],
        y: &[u8],
        sample_weights: &[f64],
        masks: Option<&[Vec<f64>]>,
    ) -> MlpGradients {
        let (h, d) = (self.hidden_size, self.input_size);
        let b = rows.len() as f64;
        let mut gw1 = vec![0.0; h * d];
        let mut gb1 = vec![0.0; h];
        let mut gw2 = vec![0.0; h];
        let mut gb2 = 0.0;

        for (i, xs) in rows.iter().enumerate() {
            let pre = self.hidden_pre(xs);
            let mut act: Vec<f64> = pre.iter().map(|&a| relu(a)).collect();
            if let Some(masks) = masks {
                for (a, m) in act.iter_mut().zip(&masks[i]) {
                    *a *= m;
                }
            }
            let z = act
                .iter()
                .zip(&self.output_weights)
                .map(|(a, w)| a * w)
                .sum::<f64>()
                + self.output_bias;
            let delta = sample_weights[i] * (sigmoid(z) - y[i] as f64) / b;

            gb2 += delta;
            for (g, a) in gw2.iter_mut().zip(&act) {
                *g += delta * a;
            }
            for j in 0..h {
                let mut dh = delta * self.output_weights[j];
                if let Some(masks) = masks {
                    dh *= masks[i][j];
                }
                if pre[j] <= 0.0 {
                    continue;
                }
                gb1[j] += dh;
                let row = &mut gw1[j * d..(j + 1) * d];
                for (g, x) in row.iter_mut().zip(xs) {
                    *g += dh * x;
                }
            }
        }
        MlpGradients {
            hidden_weights: gw1,
            hidden_bias: gb1,
            output_weights: gw2,
            output_bias: gb2,
        }
    }

    /// Gradients with dropout disabled; the reference for numeric checks.
    pub fn batch_gradients(
        &self,
        rows: &[Vec<f64>],
        y: &[u8],
        sample_weights: &[f64],
    ) -> MlpGradients {
        self.gradients(rows, y, sample_weights, None)
    }
}

/// Train the perceptron. Deterministic for a fixed seed.
pub fn mlp_train(
    x: &FeatureMatrix,
    y: &[u8],
    config: &MlpConfig,
    class_weights: Option<[f64; 2]>,
) -> Result<MlpModel> {
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
    if config.hidden_size == 0 || config.batch_size == 0 || config.epochs == 0 {
        return Err(Error::config(
            "hidden_size, batch_size and epochs must be positive",
        ));
    }
    if !(0.0..1.0).contains(&config.dropout) {
        return Err(Error::config("dropout must lie in [0,1)"));
    }

    let h = config.hidden_size;
    let mut rng = rng::seeded(config.seed);
    let std1 = (2.0 / (d + h) as f64).sqrt();
    let std2 = (2.0 / (h + 1) as f64).sqrt();
    let mut model = MlpModel {
        hidden_weights: (0..h * d)
            .map(|_| std1 * rng::standard_normal(&mut rng))
            .collect(),
        hidden_bias: vec![0.0; h],
        output_weights: (0..h).map(|_| std2 * rng::standard_normal(&mut rng)).collect(),
        output_bias: 0.0,
        input_size: d,
        hidden_size: h,
        config: config.clone(),
        loss_history: Vec::new(),
    };

    let cw = class_weights.unwrap_or([1.0, 1.0]);
    let sample_weights: Vec<f64> = y.iter().map(|&l| cw[l as usize]).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut buf = vec![0.0; d];
            x.copy_row_dense(i, &mut buf);
            buf
        })
        .collect();

    let keep = 1.0 - config.dropout;
    let lr = config.learning_rate;
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 1..=config.epochs {
        rng::shuffle(&mut order, &mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let batch_rows: Vec<Vec<f64>> = batch.iter().map(|&i| rows[i].clone()).collect();
            let batch_y: Vec<u8> = batch.iter().map(|&i| y[i]).collect();
            let batch_w: Vec<f64> = batch.iter().map(|&i| sample_weights[i]).collect();

            let masks: Option<Vec<Vec<f64>>> = if config.dropout > 0.0 {
                Some(
                    (0..batch.len())
                        .map(|_| {
                            (0..h)
                                .map(|_| {
                                    if rng.gen::<f64>() < keep {
                                        1.0 / keep
                                    } else {
                                        0.0
                                    }
                                })
                                .collect()
                        })
                        .collect(),
                )
            } else {
                None
            };

            let grads = model.gradients(&batch_rows, &batch_y, &batch_w, masks.as_deref());
            for (w, g) in model.hidden_weights.iter_mut().zip(&grads.hidden_weights) {
                *w -= lr * g;
            }
            for (b, g) in model.hidden_bias.iter_mut().zip(&grads.hidden_bias) {
                *b -= lr * g;
            }
            for (w, g) in model.output_weights.iter_mut().zip(&grads.output_weights) {
                *w -= lr * g;
            }
            model.output_bias -= lr * grads.output_bias;

            epoch_loss +=
                model.batch_loss(&batch_rows, &batch_y, &batch_w) * batch.len() as f64;
        }
        let mean_loss = epoch_loss / n as f64;
        if !mean_loss.is_finite() {
            return Err(Error::Divergence {
                stage: "mlp",
                epoch,
            });
        }
        model.loss_history.push(mean_loss);
    }
    Ok(model)
}

/// Forward pass without dropout: `sigmoid(logit)` per row.
pub fn mlp_predict_proba(model: &MlpModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    x.ensure_width(model.input_size)?;
    let mut buf = vec![0.0; model.input_size];
    Ok((0..x.n_rows())
        .map(|i| {
            x.copy_row_dense(i, &mut buf);
            sigmoid(model.logit(&buf))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_clamps_negatives() {
        assert_eq!(relu(-3.0), 0.0);
        assert_eq!(relu(2.0), 2.0);
        assert_eq!(relu(0.0), 0.0);
    }

    #[test]
    fn zero_output_layer_predicts_sigmoid_of_bias() {
        let mut model = MlpModel {
            hidden_weights: vec![0.3; 4 * 2],
            hidden_bias: vec![0.1; 4],
            output_weights: vec![0.0; 4],
            output_bias: -0.7,
            input_size: 2,
            hidden_size: 4,
            config: MlpConfig::default(),
            loss_history: Vec::new(),
        };
        let x = FeatureMatrix::dense(2, 2, vec![1.0, 2.0, -3.0, 0.5]);
        let p = mlp_predict_proba(&model, &x).unwrap();
        let expected = sigmoid(-0.7);
        assert_eq!(p, vec![expected, expected]);
        model.output_bias = 0.0;
        let p = mlp_predict_proba(&model, &x).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(11);
        let (n, d, h) = (6, 4, 5);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect())
            .collect();
        let y: Vec<u8> = vec![1, 0, 1, 0, 0, 1];
        let sw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let mut model = MlpModel {
            hidden_weights: (0..h * d).map(|_| rng.gen_range(-0.7..0.7)).collect(),
            hidden_bias: (0..h).map(|_| rng.gen_range(-0.3..0.3)).collect(),
            output_weights: (0..h).map(|_| rng.gen_range(-0.7..0.7)).collect(),
            output_bias: rng.gen_range(-0.3..0.3),
            input_size: d,
            hidden_size: h,
            config: MlpConfig::default(),
            loss_history: Vec::new(),
        };
        let grads = model.batch_gradients(&rows, &y, &sw);
        let hstep = 1e-6;
        let mut check = |analytic: f64, get: &mut dyn FnMut(&mut MlpModel) -> &mut f64| {
            let orig = *get(&mut model);
            *get(&mut model) = orig + hstep;
            let up = model.batch_loss(&rows, &y, &sw);
            *get(&mut model) = orig - hstep;
            let down = model.batch_loss(&rows, &y, &sw);
            *get(&mut model) = orig;
            let fd = (up - down) / (2.0 * hstep);
            let denom = analytic.abs().max(fd.abs()).max(1e-6);
            assert!(
                ((analytic - fd) / denom).abs() < 1e-4,
                "analytic {analytic} vs fd {fd}"
            );
        };
        for k in 0..h * d {
            check(grads.hidden_weights[k], &mut |m| &mut m.hidden_weights[k]);
        }
        for k in 0..h {
            check(grads.hidden_bias[k], &mut |m| &mut m.hidden_bias[k]);
            check(grads.output_weights[k], &mut |m| &mut m.output_weights[k]);
        }
        check(grads.output_bias, &mut |m| &mut m.output_bias);
    }

    #[test]
    fn xor_pattern_is_separable_for_some_seed() {
        let x = FeatureMatrix::dense(4, 2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
        let y = vec![0, 1, 1, 0];
        let mut solved = false;
        for seed in 0..5 {
            let config = MlpConfig {
                hidden_size: 100,
                epochs: 600,
                learning_rate: 0.5,
                batch_size: 4,
                dropout: 0.0,
                seed,
            };
            let model = mlp_train(&x, &y, &config, None).unwrap();
            let p = mlp_predict_proba(&model, &x).unwrap();
            if p.iter().zip(&y).all(|(pi, &yi)| u8::from(*pi >= 0.5) == yi) {
                solved = true;
                break;
            }
        }
        assert!(solved, "no seed in 0..5 separated the xor pattern");
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(2);
        let x = FeatureMatrix::dense(
            10,
            3,
            (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let y = vec![0, 1, 0, 1, 1, 0, 0, 1, 1, 0];
        let config = MlpConfig {
            hidden_size: 8,
            epochs: 10,
            seed: 3,
            ..MlpConfig::default()
        };
        let a = mlp_train(&x, &y, &config, None).unwrap();
        let b = mlp_train(&x, &y, &config, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inference_is_row_independent() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(5);
        let x = FeatureMatrix::dense(
            6,
            3,
            (0..18).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let y = vec![0, 1, 0, 1, 1, 0];
        let config = MlpConfig {
            hidden_size: 6,
            epochs: 5,
            ..MlpConfig::default()
        };
        let model = mlp_train(&x, &y, &config, None).unwrap();
        let all = mlp_predict_proba(&model, &x).unwrap();
        // Rows evaluated one at a time, in reverse, give the same numbers.
        for i in (0..6).rev() {
            let row: Vec<f64> = (0..3).map(|j| x.get(i, j)).collect();
            let single = mlp_predict_proba(&model, &FeatureMatrix::dense(1, 3, row)).unwrap();
            assert_eq!(single[0].to_bits(), all[i].to_bits());
        }
    }
}
