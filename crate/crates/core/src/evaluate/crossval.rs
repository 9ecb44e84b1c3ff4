//! Group-disjoint cross-validation and learning curves.
//!
//! Every fold fits the whole pipeline — vocabulary, weighting, reduction,
//! classifier — on its training part only and scores the held-out part.
//! A leakage audit verifies after each fit that no fitted vocabulary token
//! exists only in held-out documents.

use serde::{Deserialize, Serialize};

use super::{confusion, metrics, Metrics};
use crate::classify::predict_label;
use crate::corpus::{kfold, Corpus};
use crate::error::{Error, Result};
use crate::pipeline::{FittedPipeline, PipelineConfig};
use crate::preprocess::TokenSeq;
use crate::rng::{self, offsets, stage_seed};
use crate::vectorize::Vocabulary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_validation: usize,
    pub metrics: Metrics,
}

/// Cross-validation report: per-fold metrics, their mean and population
/// standard deviation (over folds where the metric is defined), and the
/// configuration snapshot that reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub mean: Metrics,
    pub std: Metrics,
    pub config: PipelineConfig,
}

/// Check that every vocabulary token occurs in at least one training
/// document; a token seen only in validation documents proves the fit saw
/// held-out data.
pub fn audit_vocabulary_leakage(
    vocab: &Vocabulary,
    train_docs: &[TokenSeq],
    validation_docs: &[TokenSeq],
) -> Result<()> {
    let mut train_tokens: std::collections::HashSet<&str> = std::collections::HashSet::new();
    for doc in train_docs {
        for t in doc {
            train_tokens.insert(t.as_str());
        }
    }
    let mut leaked: Vec<&str> = vocab
        .tokens()
        .iter()
        .map(String::as_str)
        .filter(|t| !train_tokens.contains(t))
        .collect();
    if leaked.is_empty() {
        return Ok(());
    }
    leaked.sort_unstable();
    let validation_tokens: std::collections::HashSet<&str> = validation_docs
        .iter()
        .flat_map(|doc| doc.iter().map(String::as_str))
        .collect();
    let from_validation = leaked
        .iter()
        .filter(|t| validation_tokens.contains(**t))
        .count();
    leaked.truncate(10);
    Err(Error::integrity(format!(
        "leakage audit failed: {from_validation} vocabulary tokens exist only in held-out \
         documents; first offenders: {leaked:?}"
    )))
}

fn aggregate(folds: &[FoldResult]) -> (Metrics, Metrics) {
    let pick = |get: &dyn Fn(&Metrics) -> Option<f64>| -> (Option<f64>, Option<f64>) {
        let values: Vec<f64> = folds.iter().filter_map(|f| get(&f.metrics)).collect();
        if values.is_empty() {
            return (None, None);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / values.len() as f64;
        (Some(mean), Some(var.sqrt()))
    };
    let (acc_m, acc_s) = pick(&|m| m.accuracy);
    let (pre_m, pre_s) = pick(&|m| m.precision);
    let (rec_m, rec_s) = pick(&|m| m.recall);
    let (f1_m, f1_s) = pick(&|m| m.f1);
    (
        Metrics {
            accuracy: acc_m,
            precision: pre_m,
            recall: rec_m,
            f1: f1_m,
        },
        Metrics {
            accuracy: acc_s,
            precision: pre_s,
            recall: rec_s,
            f1: f1_s,
        },
    )
}

fn run_fold(
    fold: usize,
    train: &Corpus,
    validation: &Corpus,
    config: &PipelineConfig,
) -> Result<FoldResult> {
    let pipeline = FittedPipeline::fit(config, train)?;
    let train_docs = pipeline.preprocess_texts(train.notes.iter().map(|n| n.text.as_str()));
    let validation_docs =
        pipeline.preprocess_texts(validation.notes.iter().map(|n| n.text.as_str()));
    audit_vocabulary_leakage(pipeline.vocabulary(), &train_docs, &validation_docs)?;

    let x = pipeline.features(&validation_docs)?;
    let probabilities = pipeline.classifier.predict_proba(&x)?;
    let predicted = predict_label(&probabilities, pipeline.threshold)?;
    let counts = confusion(&validation.labels(), &predicted)?;
    Ok(FoldResult {
        fold,
        n_train: train.len(),
        n_validation: validation.len(),
        metrics: metrics(&counts),
    })
}

/// Run k-fold cross-validation as configured. `threads` > 1 evaluates folds
/// concurrently; fold results are keyed by index so the report does not
/// depend on scheduling.
pub fn cross_validate(
    corpus: &Corpus,
    config: &PipelineConfig,
    threads: usize,
) -> Result<CvReport> {
    let k = config.evaluation.k;
    let seed = config.evaluation.seed;
    let folds = kfold(
        corpus,
        k,
        stage_seed(seed, offsets::FOLDS),
        &config.evaluation.group_keys,
    )?;

    let results: Vec<Result<FoldResult>> = if threads > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = folds
                .iter()
                .enumerate()
                .map(|(i, (train, validation))| {
                    scope.spawn(move || run_fold(i, train, validation, config))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("fold panicked")).collect()
        })
    } else {
        folds
            .iter()
            .enumerate()
            .map(|(i, (train, validation))| run_fold(i, train, validation, config))
            .collect()
    };

    let folds: Vec<FoldResult> = results.into_iter().collect::<Result<_>>()?;
    let (mean, std) = aggregate(&folds);
    Ok(CvReport {
        k,
        seed,
        folds,
        mean,
        std,
        config: config.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub fold: usize,
    pub train_score: Option<f64>,
    pub validation_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
    pub sizes: Vec<usize>,
    pub k: usize,
    pub seed: u64,
    pub config: PipelineConfig,
}

impl LearningCurve {
    /// Mean validation score per size, in size order, skipping undefined
    /// folds.
    pub fn mean_validation_scores(&self) -> Vec<(usize, Option<f64>)> {
        self.sizes
            .iter()
            .map(|&size| {
                let values: Vec<f64> = self
                    .points
                    .iter()
                    .filter(|p| p.size == size)
                    .filter_map(|p| p.validation_score)
                    .collect();
                let mean = (!values.is_empty())
                    .then(|| values.iter().sum::<f64>() / values.len() as f64);
                (size, mean)
            })
            .collect()
    }
}

/// Subsample sizes must be ascending and feasible for every fold.
pub fn learning_curve(
    corpus: &Corpus,
    config: &PipelineConfig,
    train_sizes: &[usize],
) -> Result<LearningCurve> {
    if train_sizes.is_empty() {
        return Err(Error::config("train_sizes must not be empty"));
    }
    if train_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("train_sizes must be strictly ascending"));
    }
    let seed = config.evaluation.seed;
    let folds = kfold(
        corpus,
        config.evaluation.k,
        stage_seed(seed, offsets::FOLDS),
        &config.evaluation.group_keys,
    )?;

    let mut points = Vec::new();
    for (fold_idx, (train, validation)) in folds.iter().enumerate() {
        for (size_idx, &size) in train_sizes.iter().enumerate() {
            if size > train.len() {
                return Err(Error::infeasible(format!(
                    "requested train size {size} exceeds the {} notes available in fold {fold_idx}",
                    train.len()
                )));
            }
            let subsample_seed = stage_seed(seed, offsets::SUBSAMPLE)
                .wrapping_add((fold_idx * 1009 + size_idx) as u64);
            let subset = stratified_subsample(train, size, subsample_seed);
            let pipeline = FittedPipeline::fit(config, &subset)?;

            let score = |part: &Corpus| -> Result<Option<f64>> {
                let probs = pipeline.predict_proba_corpus(part)?;
                let predicted = predict_label(&probs, pipeline.threshold)?;
                let counts = confusion(&part.labels(), &predicted)?;
                Ok(metrics(&counts).accuracy)
            };
            points.push(CurvePoint {
                size,
                fold: fold_idx,
                train_score: score(&subset)?,
                validation_score: score(validation)?,
            });
        }
    }
    Ok(LearningCurve {
        points,
        sizes: train_sizes.to_vec(),
        k: config.evaluation.k,
        seed,
        config: config.clone(),
    })
}

/// Seeded subsample of `size` notes keeping both classes represented when
/// the source has them.
fn stratified_subsample(corpus: &Corpus, size: usize, seed: u64) -> Corpus {
    let mut indices: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = rng::seeded(seed);
    rng::shuffle(&mut indices, &mut rng);
    let mut chosen: Vec<usize> = indices[..size].to_vec();
    let rest = &indices[size..];

    for class in [0u8, 1] {
        if !chosen.iter().any(|&i| corpus.notes[i].label == class) {
            if let Some(&swap_in) = rest.iter().find(|&&i| corpus.notes[i].label == class) {
                // Replace a note of the majority class to keep the size.
                let swap_out = chosen
                    .iter()
                    .position(|&i| corpus.notes[i].label != class)
                    .expect("subsample holds only the other class");
                chosen[swap_out] = swap_in;
            }
        }
    }
    chosen.sort_unstable();
    let notes = chosen.iter().map(|&i| corpus.notes[i].clone()).collect();
    Corpus::from_notes(notes, format!("{}#sub{}", corpus.provenance, size))
        .expect("subsample of a valid corpus stays valid")
}
