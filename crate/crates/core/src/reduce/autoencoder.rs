//! Tied-weight autoencoder: `z = sigmoid(W x + b)`, `x' = sigmoid(W' z + b')`
//! with the decoder weights structurally fixed to `W' = transpose(W)` — no
//! separate decoder matrix exists. Trained by mini-batch SGD on the mean
//! squared reconstruction error plus an L2 weight penalty; inputs are
//! min-max scaled to [0,1] and the scaling is stored in the model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FeatureMatrix};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeConfig {
    pub latent_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Classical momentum on the SGD updates. Zero recovers plain SGD;
    /// sparse inputs need the acceleration to escape the bias-only plateau.
    pub momentum: f64,
    pub l2_penalty: f64,
    pub batch_size: usize,
    /// Fraction of rows held out for the validation-loss curve.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for AeConfig {
    fn default() -> Self {
        AeConfig {
            latent_size: 64,
            epochs: 60,
            learning_rate: 1.0,
            momentum: 0.5,
            l2_penalty: 1e-4,
            batch_size: 32,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeModel {
    /// Encoder weights, latent_size x input_size row-major. The decoder is
    /// the transpose of this same storage.
    pub weights: Vec<f64>,
    pub encoder_bias: Vec<f64>,
    pub decoder_bias: Vec<f64>,
    pub latent_size: usize,
    pub input_size: usize,
    /// Recorded min-max input scaling.
    pub feature_min: Vec<f64>,
    pub feature_range: Vec<f64>,
    pub config: AeConfig,
    pub train_loss: Vec<f64>,
    pub validation_loss: Vec<f64>,
}

/// Gradients of the batch loss with respect to every parameter.
#[derive(Debug, Clone)]
pub struct AeGradients {
    pub weights: Vec<f64>,
    pub encoder_bias: Vec<f64>,
    pub decoder_bias: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl AeModel {
    /// Bare model with explicit parameters and identity scaling.
    pub fn with_parameters(
        weights: Vec<f64>,
        encoder_bias: Vec<f64>,
        decoder_bias: Vec<f64>,
        config: AeConfig,
    ) -> Self {
        let latent_size = encoder_bias.len();
        let input_size = decoder_bias.len();
        assert_eq!(weights.len(), latent_size * input_size);
        AeModel {
            weights,
            encoder_bias,
            decoder_bias,
            latent_size,
            input_size,
            feature_min: vec![0.0; input_size],
            feature_range: vec![1.0; input_size],
            config,
            train_loss: Vec::new(),
            validation_loss: Vec::new(),
        }
    }

    pub fn scale_row(&self, raw: &[f64], out: &mut [f64]) {
        for ((o, &v), (&min, &range)) in out
            .iter_mut()
            .zip(raw)
            .zip(self.feature_min.iter().zip(&self.feature_range))
        {
            *o = (v - min) / range;
        }
    }

    /// Latent activation of one scaled row.
    pub fn encode_scaled(&self, xs: &[f64]) -> Vec<f64> {
        let (m, d) = (self.latent_size, self.input_size);
        (0..m)
            .map(|i| {
                let row = &self.weights[i * d..(i + 1) * d];
                sigmoid(row.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>() + self.encoder_bias[i])
            })
            .collect()
    }

    /// Reconstruction of one scaled row through the tied decoder.
    pub fn reconstruct_scaled(&self, xs: &[f64]) -> Vec<f64> {
        let z = self.encode_scaled(xs);
        self.decode_latent(&z)
    }

    fn decode_latent(&self, z: &[f64]) -> Vec<f64> {
        let (m, d) = (self.latent_size, self.input_size);
        let mut out = self.decoder_bias.clone();
        for (i, &zi) in z.iter().enumerate().take(m) {
            if zi == 0.0 {
                continue;
            }
            let row = &self.weights[i * d..(i + 1) * d];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * zi;
            }
        }
        out.into_iter().map(sigmoid).collect()
    }

    /// Mean squared reconstruction error over scaled rows plus the L2
    /// weight penalty.
    pub fn batch_loss(&self, rows: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for xs in rows {
            let xr = self.reconstruct_scaled(xs);
            total += xr
                .iter()
                .zip(xs)
                .map(|(r, x)| (r - x) * (r - x))
                .sum::<f64>();
        }
        total / rows.len() as f64
            + self.config.l2_penalty * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Backpropagated gradients of [`Self::batch_loss`]. The tied weight
    /// matrix accumulates both its encoder and decoder contributions.
    pub fn batch_gradients(&self, rows: &[Vec<f64>]) -> AeGradients {
        let (m, d) = (self.latent_size, self.input_size);
        let mut gw = vec![0.0; m * d];
        let mut gb = vec![0.0; m];
        let mut gb2 = vec![0.0; d];

        for xs in rows {
            let z = self.encode_scaled(xs);
            let xr = self.decode_latent(&z);

            let delta_out: Vec<f64> = xr
                .iter()
                .zip(xs)
                .map(|(r, x)| 2.0 * (r - x) * r * (1.0 - r))
                .collect();
            for (g, dlt) in gb2.iter_mut().zip(&delta_out) {
                *g += dlt;
            }
            // Decoder contribution: c = W' z + b'.
            for i in 0..m {
                let row = &mut gw[i * d..(i + 1) * d];
                for (g, dlt) in row.iter_mut().zip(&delta_out) {
                    *g += z[i] * dlt;
                }
            }
            // Back through the latent layer.
            let mut delta_latent = vec![0.0; m];
            for i in 0..m {
                let row = &self.weights[i * d..(i + 1) * d];
                let dz: f64 = row.iter().zip(&delta_out).map(|(w, dlt)| w * dlt).sum();
                delta_latent[i] = dz * z[i] * (1.0 - z[i]);
            }
            for (g, dlt) in gb.iter_mut().zip(&delta_latent) {
                *g += dlt;
            }
            // Encoder contribution: a = W x + b.
            for i in 0..m {
                let row = &mut gw[i * d..(i + 1) * d];
                for (g, x) in row.iter_mut().zip(xs) {
                    *g += delta_latent[i] * x;
                }
            }
        }

        let b = rows.len() as f64;
        for (g, w) in gw.iter_mut().zip(&self.weights) {
            *g = *g / b + 2.0 * self.config.l2_penalty * w;
        }
        for g in gb.iter_mut().chain(gb2.iter_mut()) {
            *g /= b;
        }
        AeGradients {
            weights: gw,
            encoder_bias: gb,
            decoder_bias: gb2,
        }
    }
}

/// Train a tied-weight autoencoder on the rows of `x`.
pub fn ae_train(x: &FeatureMatrix, config: &AeConfig) -> Result<AeModel> {
    let (n, d) = x.shape();
    let m = config.latent_size;
    if m == 0 {
        return Err(Error::config("latent size must be positive"));
    }
    if m >= d {
        return Err(Error::config(format!(
            "latent size {m} must be smaller than the input width {d}"
        )));
    }
    if n == 0 {
        return Err(Error::config("cannot train on an empty matrix"));
    }
    if config.batch_size == 0 || config.epochs == 0 || config.learning_rate <= 0.0 {
        return Err(Error::config(
            "batch_size, epochs and learning_rate must be positive",
        ));
    }
    if !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(Error::config("validation_fraction must lie in [0,1)"));
    }

    // Min-max scaling fitted on the full input; constant features map to 0.
    let mut feature_min = vec![f64::INFINITY; d];
    let mut feature_max = vec![f64::NEG_INFINITY; d];
    let mut buf = vec![0.0; d];
    for i in 0..n {
        x.copy_row_dense(i, &mut buf);
        for ((mn, mx), &v) in feature_min.iter_mut().zip(&mut feature_max).zip(&buf) {
            *mn = mn.min(v);
            *mx = mx.max(v);
        }
    }
    // Dividing by at least 1 keeps the map into [0,1] without stretching
    // features whose spread is already small.
    let feature_range: Vec<f64> = feature_min
        .iter()
        .zip(&feature_max)
        .map(|(mn, mx)| (mx - mn).max(1.0))
        .collect();

    let mut rng = rng::seeded(config.seed);
    // Floor the spread so hidden activations differentiate on sparse
    // near-unit-norm rows; plain Glorot leaves them indistinguishable.
    let limit = (6.0 / (m + d) as f64).sqrt().max(0.6);
    let weights: Vec<f64> = (0..m * d).map(|_| rng.gen_range(-limit..limit)).collect();
    // Decoder bias starts at the logit of each feature's scaled mean, so
    // the first epochs refine structure instead of chasing the sparse
    // background level.
    let mut column_mean = vec![0.0; d];
    for i in 0..n {
        x.copy_row_dense(i, &mut buf);
        for (s, (&v, (&mn, &range))) in column_mean
            .iter_mut()
            .zip(buf.iter().zip(feature_min.iter().zip(&feature_range)))
        {
            *s += (v - mn) / range;
        }
    }
    // The clamp keeps the sigmoid out of its saturated tails so gradients
    // stay alive on sparse columns.
    let decoder_bias: Vec<f64> = column_mean
        .iter()
        .map(|s| {
            let p = (s / n as f64).clamp(0.05, 0.95);
            (p / (1.0 - p)).ln()
        })
        .collect();
    let mut model = AeModel {
        weights,
        encoder_bias: vec![0.0; m],
        decoder_bias,
        latent_size: m,
        input_size: d,
        feature_min,
        feature_range,
        config: config.clone(),
        train_loss: Vec::new(),
        validation_loss: Vec::new(),
    };

    let scaled: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            x.copy_row_dense(i, &mut buf);
            let mut row = vec![0.0; d];
            model.scale_row(&buf, &mut row);
            row
        })
        .collect();

    let mut indices: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut indices, &mut rng);
    let n_val = ((n as f64) * config.validation_fraction).floor() as usize;
    let n_val = if n - n_val == 0 { 0 } else { n_val };
    let (val_idx, train_idx) = indices.split_at(n_val);

    let lr = config.learning_rate;
    let beta = config.momentum;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::config("momentum must lie in [0,1)"));
    }
    let mut vel_w = vec![0.0; m * d];
    let mut vel_b = vec![0.0; m];
    let mut vel_b2 = vec![0.0; d];
    let mut order: Vec<usize> = train_idx.to_vec();
    for epoch in 1..=config.epochs {
        rng::shuffle(&mut order, &mut rng);
        for batch in order.chunks(config.batch_size) {
            let rows: Vec<Vec<f64>> = batch.iter().map(|&i| scaled[i].clone()).collect();
            let grads = model.batch_gradients(&rows);
            for ((w, v), g) in model.weights.iter_mut().zip(&mut vel_w).zip(&grads.weights) {
                *v = beta * *v - lr * g;
                *w += *v;
            }
            for ((b, v), g) in model
                .encoder_bias
                .iter_mut()
                .zip(&mut vel_b)
                .zip(&grads.encoder_bias)
            {
                *v = beta * *v - lr * g;
                *b += *v;
            }
            for ((b, v), g) in model
                .decoder_bias
                .iter_mut()
                .zip(&mut vel_b2)
                .zip(&grads.decoder_bias)
            {
                *v = beta * *v - lr * g;
                *b += *v;
            }
        }
        let train_rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| scaled[i].clone()).collect();
        let loss = model.batch_loss(&train_rows);
        if !loss.is_finite() {
            return Err(Error::Divergence {
                stage: "autoencoder",
                epoch,
            });
        }
        model.train_loss.push(loss);
        if !val_idx.is_empty() {
            let val_rows: Vec<Vec<f64>> = val_idx.iter().map(|&i| scaled[i].clone()).collect();
            model.validation_loss.push(model.batch_loss(&val_rows));
        }
    }
    Ok(model)
}

/// Encode rows into the latent space after the recorded input scaling.
pub fn ae_encode(x: &FeatureMatrix, model: &AeModel) -> Result<FeatureMatrix> {
    x.ensure_width(model.input_size)?;
    let n = x.n_rows();
    let mut out = DenseMatrix::zeros(n, model.latent_size);
    let mut raw = vec![0.0; model.input_size];
    let mut scaled = vec![0.0; model.input_size];
    for i in 0..n {
        x.copy_row_dense(i, &mut raw);
        model.scale_row(&raw, &mut scaled);
        out.row_mut(i).copy_from_slice(&model.encode_scaled(&scaled));
    }
    Ok(FeatureMatrix::Dense(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_model(m: usize, d: usize) -> AeModel {
        AeModel::with_parameters(
            vec![0.0; m * d],
            vec![0.0; m],
            vec![0.0; d],
            AeConfig {
                latent_size: m,
                l2_penalty: 0.0,
                ..AeConfig::default()
            },
        )
    }

    #[test]
    fn zero_parameters_reconstruct_one_half() {
        let model = zero_model(2, 4);
        let xr = model.reconstruct_scaled(&[0.3, 0.9, 0.0, 1.0]);
        for v in xr {
            assert_eq!(v, 0.5);
        }
    }

    #[test]
    fn zero_row_and_bias_encode_to_one_half() {
        let mut model = zero_model(3, 5);
        model.weights = (0..15).map(|i| i as f64 * 0.1).collect();
        let x = FeatureMatrix::dense(1, 5, vec![0.0; 5]);
        let z = ae_encode(&x, &model).unwrap();
        assert_eq!(z.shape(), (1, 3));
        for j in 0..3 {
            assert_eq!(z.get(0, j), 0.5);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = crate::rng::seeded(42);
        use rand::Rng;
        let (m, d) = (4, 6);
        let config = AeConfig {
            latent_size: m,
            l2_penalty: 1e-3,
            ..AeConfig::default()
        };
        let mut model = AeModel::with_parameters(
            (0..m * d).map(|_| rng.gen_range(-0.8..0.8)).collect(),
            (0..m).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            config,
        );
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let grads = model.batch_gradients(&rows);
        let h = 1e-6;
        let mut check = |analytic: f64, get: &mut dyn FnMut(&mut AeModel) -> &mut f64| {
            let orig = *get(&mut model);
            *get(&mut model) = orig + h;
            let up = model.batch_loss(&rows);
            *get(&mut model) = orig - h;
            let down = model.batch_loss(&rows);
            *get(&mut model) = orig;
            let fd = (up - down) / (2.0 * h);
            let denom = analytic.abs().max(fd.abs()).max(1e-6);
            assert!(
                ((analytic - fd) / denom).abs() < 1e-4,
                "analytic {analytic} vs fd {fd}"
            );
        };
        for k in 0..m * d {
            check(grads.weights[k], &mut |mdl| &mut mdl.weights[k]);
        }
        for k in 0..m {
            check(grads.encoder_bias[k], &mut |mdl| &mut mdl.encoder_bias[k]);
        }
        for k in 0..d {
            check(grads.decoder_bias[k], &mut |mdl| &mut mdl.decoder_bias[k]);
        }
    }

    #[test]
    fn training_loss_decreases_on_fixed_input() {
        let mut rng = crate::rng::seeded(0);
        use rand::Rng;
        let values: Vec<f64> = (0..20 * 10).map(|_| rng.gen_range(0.0..1.0)).collect();
        let x = FeatureMatrix::dense(20, 10, values);
        let config = AeConfig {
            latent_size: 4,
            epochs: 50,
            learning_rate: 0.5,
            momentum: 0.0,
            l2_penalty: 1e-4,
            batch_size: 8,
            validation_fraction: 0.0,
            seed: 0,
        };
        let model = ae_train(&x, &config).unwrap();
        assert_eq!(model.train_loss.len(), 50);
        assert!(
            model.train_loss[49] < model.train_loss[0],
            "{:?}",
            model.train_loss
        );
        for w in model.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-3, "loss jumped: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn latent_width_and_determinism() {
        let mut rng = crate::rng::seeded(9);
        use rand::Rng;
        let values: Vec<f64> = (0..12 * 8).map(|_| rng.gen_range(0.0..3.0)).collect();
        let x = FeatureMatrix::dense(12, 8, values);
        let config = AeConfig {
            latent_size: 3,
            epochs: 5,
            ..AeConfig::default()
        };
        let m1 = ae_train(&x, &config).unwrap();
        let m2 = ae_train(&x, &config).unwrap();
        assert_eq!(m1, m2);
        let z = ae_encode(&x, &m1).unwrap();
        assert_eq!(z.shape(), (12, 3));
        let z2 = ae_encode(&x, &m1).unwrap();
        assert_eq!(z, z2);
    }

    #[test]
    fn oversized_latent_is_a_config_error() {
        let x = FeatureMatrix::dense(4, 3, vec![0.0; 12]);
        let config = AeConfig {
            latent_size: 3,
            ..AeConfig::default()
        };
        assert!(matches!(ae_train(&x, &config).unwrap_err(), Error::Config(_)));
    }

    #[test]
    fn validation_history_is_tracked() {
        let mut rng = crate::rng::seeded(4);
        use rand::Rng;
        let values: Vec<f64> = (0..30 * 6).map(|_| rng.gen_range(0.0..1.0)).collect();
        let x = FeatureMatrix::dense(30, 6, values);
        let config = AeConfig {
            latent_size: 2,
            epochs: 8,
            validation_fraction: 0.2,
            ..AeConfig::default()
        };
        let model = ae_train(&x, &config).unwrap();
        assert_eq!(model.validation_loss.len(), 8);
        assert!(model.validation_loss.iter().all(|l| l.is_finite()));
    }
}
