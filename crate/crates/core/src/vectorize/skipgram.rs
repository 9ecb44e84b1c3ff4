//! Skip-gram word embeddings trained by stochastic gradient ascent on
//! `log p(context | center)`.
//!
//! Two objectives: the exact softmax over the whole vocabulary (reference,
//! used by the numeric checks) and negative sampling (default, fast enough
//! for pipeline use). Center vectors start at small seeded uniform values,
//! context vectors at zero, so the initial conditional distribution is
//! uniform.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{build_vocab, Vocabulary};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::preprocess::TokenSeq;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SkipgramMode {
    FullSoftmax,
    NegativeSampling { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipgramConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
    pub mode: SkipgramMode,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            dim: 100,
            window: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 1,
            seed: 0,
            mode: SkipgramMode::NegativeSampling { k: 5 },
        }
    }
}

/// Trained embedding parameters: `center[i]` is the vector of word `i` as a
/// center word, `context[i]` as a context word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingModel {
    pub vocabulary: Vocabulary,
    pub center: Vec<Vec<f64>>,
    pub context: Vec<Vec<f64>>,
    pub dim: usize,
    pub config: SkipgramConfig,
    /// Mean pair loss per epoch. Full-softmax mode records the exact
    /// negative log-likelihood with the pre-training value prepended;
    /// negative sampling records its own objective, one entry per epoch.
    pub loss_history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-ln(sigmoid(x))`, stable for large |x|.
fn softplus_neg(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax distribution over context words given a center word.
pub fn conditional_distribution(model: &EmbeddingModel, center: usize) -> Vec<f64> {
    let v_c = &model.center[center];
    let logits: Vec<f64> = model.context.iter().map(|u| dot(u, v_c)).collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Exact `log p(context | center)` under the full softmax.
pub fn log_prob(model: &EmbeddingModel, center: usize, context: usize) -> f64 {
    let v_c = &model.center[center];
    let logits: Vec<f64> = model.context.iter().map(|u| dot(u, v_c)).collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits[context] - log_sum
}

/// Analytic gradient of `log p(context | center)` with respect to the
/// center vector and every context vector.
pub fn skipgram_pair_gradients(
    model: &EmbeddingModel,
    center: usize,
    context: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = conditional_distribution(model, center);
    let v_c = &model.center[center];
    let d = model.dim;
    let mut grad_center = model.context[context].clone();
    for (i, u) in model.context.iter().enumerate() {
        for k in 0..d {
            grad_center[k] -= p[i] * u[k];
        }
    }
    let grad_context: Vec<Vec<f64>> = (0..model.context.len())
        .map(|i| {
            let coef = if i == context { 1.0 - p[i] } else { -p[i] };
            v_c.iter().map(|&x| coef * x).collect()
        })
        .collect();
    (grad_center, grad_context)
}

fn collect_pairs(docs: &[TokenSeq], vocab: &Vocabulary, window: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for doc in docs {
        let ids: Vec<usize> = doc.iter().filter_map(|t| vocab.index(t)).collect();
        for t in 0..ids.len() {
            let lo = t.saturating_sub(window);
            let hi = (t + window).min(ids.len().saturating_sub(1));
            for o in lo..=hi {
                if o != t {
                    pairs.push((ids[t], ids[o]));
                }
            }
        }
    }
    pairs
}

fn unigram_table(docs: &[TokenSeq], vocab: &Vocabulary) -> Vec<f64> {
    let mut counts = vec![0.0f64; vocab.len()];
    for doc in docs {
        for token in doc {
            if let Some(i) = vocab.index(token) {
                counts[i] += 1.0;
            }
        }
    }
    // Cumulative weights of the count^0.75 distribution.
    let mut cumulative = Vec::with_capacity(counts.len());
    let mut acc = 0.0;
    for c in counts {
        acc += c.powf(0.75);
        cumulative.push(acc);
    }
    cumulative
}

fn draw_negative(table: &[f64], rng: &mut rng::ChaCha8Rng) -> usize {
    let total = *table.last().expect("non-empty vocabulary");
    let r = rng.gen::<f64>() * total;
    table.partition_point(|&c| c <= r).min(table.len() - 1)
}

fn mean_full_softmax_nll(model: &EmbeddingModel, pairs: &[(usize, usize)]) -> f64 {
    let mut by_center: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &(c, o) in pairs {
        by_center.entry(c).or_default().push(o);
    }
    let mut total = 0.0;
    for (c, contexts) in by_center {
        let v_c = &model.center[c];
        let logits: Vec<f64> = model.context.iter().map(|u| dot(u, v_c)).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        for o in contexts {
            total -= logits[o] - log_sum;
        }
    }
    total / pairs.len() as f64
}

/// Train skip-gram embeddings on tokenized documents.
pub fn skipgram_train(docs: &[TokenSeq], config: &SkipgramConfig) -> Result<EmbeddingModel> {
    if config.dim == 0 {
        return Err(Error::config("embedding dimension must be positive"));
    }
    if config.window == 0 {
        return Err(Error::config("context window must be positive"));
    }
    if let SkipgramMode::NegativeSampling { k } = config.mode {
        if k == 0 {
            return Err(Error::config("negative sample count must be positive"));
        }
    }
    if docs.is_empty() {
        return Err(Error::config("cannot train embeddings on zero documents"));
    }
    let vocab = build_vocab(docs, config.min_count, None)?;
    if vocab.len() < 2 {
        return Err(Error::config(format!(
            "skip-gram needs a vocabulary of at least 2 tokens, got {}",
            vocab.len()
        )));
    }

    let d = config.dim;
    let mut rng = rng::seeded(config.seed);
    let mut center: Vec<Vec<f64>> = (0..vocab.len())
        .map(|_| (0..d).map(|_| (rng.gen::<f64>() - 0.5) / d as f64).collect())
        .collect();
    let mut context: Vec<Vec<f64>> = vec![vec![0.0; d]; vocab.len()];

    let pairs = collect_pairs(docs, &vocab, config.window);
    if pairs.is_empty() {
        return Err(Error::config(
            "no (center, context) pairs; documents are too short",
        ));
    }
    let lr = config.learning_rate;
    let mut loss_history = Vec::with_capacity(config.epochs + 1);

    let snapshot = |center: &Vec<Vec<f64>>, context: &Vec<Vec<f64>>| EmbeddingModel {
        vocabulary: vocab.clone(),
        center: center.clone(),
        context: context.clone(),
        dim: d,
        config: config.clone(),
        loss_history: Vec::new(),
    };

    match config.mode {
        SkipgramMode::FullSoftmax => {
            loss_history.push(mean_full_softmax_nll(&snapshot(&center, &context), &pairs));
            for _ in 0..config.epochs {
                for &(c, o) in &pairs {
                    let v_c = center[c].clone();
                    let logits: Vec<f64> = context.iter().map(|u| dot(u, &v_c)).collect();
                    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
                    let sum: f64 = exps.iter().sum();

                    let mut grad_center = context[o].clone();
                    for (i, u) in context.iter().enumerate() {
                        let p = exps[i] / sum;
                        for k in 0..d {
                            grad_center[k] -= p * u[k];
                        }
                    }
                    for (i, u) in context.iter_mut().enumerate() {
                        let coef = ((i == o) as u8 as f64) - exps[i] / sum;
                        for k in 0..d {
                            u[k] += lr * coef * v_c[k];
                        }
                    }
                    for k in 0..d {
                        center[c][k] += lr * grad_center[k];
                    }
                }
                loss_history.push(mean_full_softmax_nll(&snapshot(&center, &context), &pairs));
            }
        }
        SkipgramMode::NegativeSampling { k } => {
            let table = unigram_table(docs, &vocab);
            for _ in 0..config.epochs {
                let mut epoch_loss = 0.0;
                for &(c, o) in &pairs {
                    let v_c = center[c].clone();
                    let mut acc = vec![0.0; d];

                    let s_o = dot(&context[o], &v_c);
                    epoch_loss += softplus_neg(s_o);
                    let g = 1.0 - sigmoid(s_o);
                    for j in 0..d {
                        acc[j] += g * context[o][j];
                        context[o][j] += lr * g * v_c[j];
                    }

                    for _ in 0..k {
                        let mut neg = draw_negative(&table, &mut rng);
                        let mut tries = 0;
                        while neg == o && tries < 8 {
                            neg = draw_negative(&table, &mut rng);
                            tries += 1;
                        }
                        if neg == o {
                            continue;
                        }
                        let s_n = dot(&context[neg], &v_c);
                        epoch_loss += softplus_neg(-s_n);
                        let g_n = -sigmoid(s_n);
                        for j in 0..d {
                            acc[j] += g_n * context[neg][j];
                            context[neg][j] += lr * g_n * v_c[j];
                        }
                    }
                    for j in 0..d {
                        center[c][j] += lr * acc[j];
                    }
                }
                loss_history.push(epoch_loss / pairs.len() as f64);
            }
        }
    }

    let mut model = snapshot(&center, &context);
    model.loss_history = loss_history;
    Ok(model)
}

/// Document vector: unweighted mean of the center vectors of in-vocabulary
/// tokens; the zero vector when none are known.
pub fn doc_embed(doc: &TokenSeq, model: &EmbeddingModel) -> Vec<f64> {
    let mut sum = vec![0.0; model.dim];
    let mut count = 0usize;
    for token in doc {
        if let Some(i) = model.vocabulary.index(token) {
            for (s, v) in sum.iter_mut().zip(&model.center[i]) {
                *s += v;
            }
            count += 1;
        }
    }
    if count > 0 {
        for s in &mut sum {
            *s /= count as f64;
        }
    }
    sum
}

/// Dense matrix of document embeddings.
pub fn embed_documents(docs: &[TokenSeq], model: &EmbeddingModel) -> FeatureMatrix {
    let rows: Vec<Vec<f64>> = docs.iter().map(|d| doc_embed(d, model)).collect();
    FeatureMatrix::Dense(crate::matrix::DenseMatrix::from_rows(rows))
}
