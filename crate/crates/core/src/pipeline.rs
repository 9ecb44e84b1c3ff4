//! Pipeline configuration and the fitted pipeline.
//!
//! A [`PipelineConfig`] names one choice per stage — preprocessing strategy,
//! representation, optional reduction, classifier — plus the evaluation
//! settings. [`FittedPipeline::fit`] trains every stage on a training corpus
//! only; the result transforms and scores unseen notes. All stage seeds fan
//! out from the single evaluation seed by fixed offsets.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classify::{
    class_weights, gnb_train, lr_train, mlp_train, LrConfig, MlpConfig, TrainedClassifier,
};
use crate::corpus::{Corpus, GroupKey};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::preprocess::{
    load_lexicon, preprocess_text, NumericStrategy, PreprocessConfig, TokenSeq,
};
use crate::reduce::{
    ae_encode, ae_train, pca_fit, pca_transform, select_k_best_fit, select_transform, AeConfig,
    AeModel, PcaModel, SelectionModel,
};
use crate::rng::{offsets, stage_seed};
use crate::vectorize::{
    build_vocab, bow_vectorize, embed_documents, l2_normalize_rows, skipgram_train, tfidf_fit,
    tfidf_transform, EmbeddingModel, SkipgramConfig, SkipgramMode, TfidfModel, Vocabulary,
};

fn default_true() -> bool {
    true
}

fn default_negation_window() -> usize {
    crate::preprocess::DEFAULT_NEGATION_WINDOW
}

/// Preprocessing choices; lexicon paths default to the bundled lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessSection {
    #[serde(default)]
    pub numeric_strategy: NumericStrategy,
    #[serde(default = "default_true")]
    pub negation: bool,
    #[serde(default = "default_negation_window")]
    pub negation_window: usize,
    #[serde(default)]
    pub stopword_file: Option<PathBuf>,
    #[serde(default)]
    pub unit_file: Option<PathBuf>,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            numeric_strategy: NumericStrategy::default(),
            negation: true,
            negation_window: default_negation_window(),
            stopword_file: None,
            unit_file: None,
        }
    }
}

impl PreprocessSection {
    /// Materialize the lexicons into a runnable configuration.
    pub fn resolve(&self) -> Result<PreprocessConfig> {
        let stopwords = match &self.stopword_file {
            Some(path) => load_lexicon(path)?,
            None => crate::preprocess::default_stopwords().clone(),
        };
        let unit_lexicon = match &self.unit_file {
            Some(path) => load_lexicon(path)?,
            None => crate::preprocess::default_units().clone(),
        };
        Ok(PreprocessConfig {
            stopwords,
            numeric_strategy: self.numeric_strategy,
            unit_lexicon,
            negation_enabled: self.negation,
            negation_window: self.negation_window,
        })
    }
}

fn default_min_df() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BowSection {
    #[serde(default = "default_min_df")]
    pub min_df: usize,
    #[serde(default)]
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfidfSection {
    #[serde(default = "default_min_df")]
    pub min_df: usize,
    #[serde(default)]
    pub max_features: Option<usize>,
    #[serde(default)]
    pub smoothing: bool,
    /// Rescale each document row to unit length after weighting.
    #[serde(default = "default_true")]
    pub l2_normalize: bool,
}

impl Default for TfidfSection {
    fn default() -> Self {
        TfidfSection {
            min_df: default_min_df(),
            max_features: None,
            smoothing: false,
            l2_normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSection {
    #[serde(default = "EmbeddingSection::default_dim")]
    pub dim: usize,
    #[serde(default = "EmbeddingSection::default_window")]
    pub window: usize,
    #[serde(default = "EmbeddingSection::default_epochs")]
    pub epochs: usize,
    #[serde(default = "EmbeddingSection::default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_min_df")]
    pub min_count: usize,
    #[serde(default = "EmbeddingSection::default_mode")]
    pub mode: SkipgramMode,
}

impl EmbeddingSection {
    fn default_dim() -> usize {
        100
    }
    fn default_window() -> usize {
        5
    }
    fn default_epochs() -> usize {
        5
    }
    fn default_learning_rate() -> f64 {
        0.025
    }
    fn default_mode() -> SkipgramMode {
        SkipgramMode::NegativeSampling { k: 5 }
    }
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection {
            dim: Self::default_dim(),
            window: Self::default_window(),
            epochs: Self::default_epochs(),
            learning_rate: Self::default_learning_rate(),
            min_count: default_min_df(),
            mode: Self::default_mode(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationSection {
    Bow(BowSection),
    Tfidf(TfidfSection),
    Embedding(EmbeddingSection),
}

impl Default for RepresentationSection {
    fn default() -> Self {
        RepresentationSection::Tfidf(TfidfSection::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectKBestSection {
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcaSection {
    pub n_components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoencoderSection {
    #[serde(default = "AutoencoderSection::default_latent")]
    pub latent_size: usize,
    #[serde(default = "AutoencoderSection::default_epochs")]
    pub epochs: usize,
    #[serde(default = "AutoencoderSection::default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "AutoencoderSection::default_momentum")]
    pub momentum: f64,
    #[serde(default = "AutoencoderSection::default_l2")]
    pub l2_penalty: f64,
    #[serde(default = "AutoencoderSection::default_batch")]
    pub batch_size: usize,
    #[serde(default = "AutoencoderSection::default_validation_fraction")]
    pub validation_fraction: f64,
}

impl AutoencoderSection {
    fn default_latent() -> usize {
        64
    }
    fn default_epochs() -> usize {
        60
    }
    fn default_learning_rate() -> f64 {
        1.0
    }
    fn default_momentum() -> f64 {
        0.9
    }
    fn default_l2() -> f64 {
        1e-4
    }
    fn default_batch() -> usize {
        32
    }
    fn default_validation_fraction() -> f64 {
        0.1
    }
}

impl Default for AutoencoderSection {
    fn default() -> Self {
        AutoencoderSection {
            latent_size: Self::default_latent(),
            epochs: Self::default_epochs(),
            learning_rate: Self::default_learning_rate(),
            momentum: Self::default_momentum(),
            l2_penalty: Self::default_l2(),
            batch_size: Self::default_batch(),
            validation_fraction: Self::default_validation_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReductionSection {
    #[default]
    None,
    SelectKBest(SelectKBestSection),
    Pca(PcaSection),
    Autoencoder(AutoencoderSection),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrSection {
    #[serde(default = "LrSection::default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "LrSection::default_epochs")]
    pub epochs: usize,
    #[serde(default = "LrSection::default_l2")]
    pub l2_penalty: f64,
    #[serde(default)]
    pub balance: bool,
}

impl LrSection {
    fn default_learning_rate() -> f64 {
        0.5
    }
    fn default_epochs() -> usize {
        300
    }
    fn default_l2() -> f64 {
        1e-4
    }
}

impl Default for LrSection {
    fn default() -> Self {
        LrSection {
            learning_rate: Self::default_learning_rate(),
            epochs: Self::default_epochs(),
            l2_penalty: Self::default_l2(),
            balance: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnbSection {
    #[serde(default = "GnbSection::default_floor")]
    pub var_floor_ratio: f64,
    #[serde(default)]
    pub balance: bool,
}

impl GnbSection {
    fn default_floor() -> f64 {
        crate::classify::DEFAULT_VAR_FLOOR_RATIO
    }
}

impl Default for GnbSection {
    fn default() -> Self {
        GnbSection {
            var_floor_ratio: Self::default_floor(),
            balance: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpSection {
    #[serde(default = "MlpSection::default_hidden")]
    pub hidden_size: usize,
    #[serde(default = "MlpSection::default_epochs")]
    pub epochs: usize,
    #[serde(default = "MlpSection::default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "MlpSection::default_batch")]
    pub batch_size: usize,
    #[serde(default = "MlpSection::default_dropout")]
    pub dropout: f64,
    #[serde(default)]
    pub balance: bool,
}

impl MlpSection {
    fn default_hidden() -> usize {
        100
    }
    fn default_epochs() -> usize {
        30
    }
    fn default_learning_rate() -> f64 {
        0.1
    }
    fn default_batch() -> usize {
        32
    }
    fn default_dropout() -> f64 {
        0.25
    }
}

impl Default for MlpSection {
    fn default() -> Self {
        MlpSection {
            hidden_size: Self::default_hidden(),
            epochs: Self::default_epochs(),
            learning_rate: Self::default_learning_rate(),
            batch_size: Self::default_batch(),
            dropout: Self::default_dropout(),
            balance: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierSection {
    Lr(LrSection),
    Gnb(GnbSection),
    Mlp(MlpSection),
}

impl Default for ClassifierSection {
    fn default() -> Self {
        ClassifierSection::Mlp(MlpSection::default())
    }
}

impl ClassifierSection {
    pub fn balance(&self) -> bool {
        match self {
            ClassifierSection::Lr(s) => s.balance,
            ClassifierSection::Gnb(s) => s.balance,
            ClassifierSection::Mlp(s) => s.balance,
        }
    }
}

fn default_k() -> usize {
    5
}

fn default_threshold() -> f64 {
    0.5
}

fn default_train_fraction() -> f64 {
    0.7
}

fn default_group_keys() -> Vec<GroupKey> {
    vec![GroupKey::PatientId, GroupKey::CareProviderId]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_group_keys")]
    pub group_keys: Vec<GroupKey>,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            k: default_k(),
            seed: 0,
            threshold: default_threshold(),
            train_fraction: default_train_fraction(),
            group_keys: default_group_keys(),
        }
    }
}

/// Full pipeline configuration. Unknown keys are rejected at parse time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub representation: RepresentationSection,
    #[serde(default)]
    pub reduction: ReductionSection,
    #[serde(default)]
    pub classifier: ClassifierSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
}

/// A fitted representation stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedRepresentation {
    Bow { vocabulary: Vocabulary },
    Tfidf { model: TfidfModel, l2_normalize: bool },
    Embedding { model: EmbeddingModel },
}

impl FittedRepresentation {
    pub fn vocabulary(&self) -> &Vocabulary {
        match self {
            FittedRepresentation::Bow { vocabulary } => vocabulary,
            FittedRepresentation::Tfidf { model, .. } => &model.vocabulary,
            FittedRepresentation::Embedding { model } => &model.vocabulary,
        }
    }

    pub fn transform(&self, docs: &[TokenSeq]) -> FeatureMatrix {
        match self {
            FittedRepresentation::Bow { vocabulary } => bow_vectorize(docs, vocabulary),
            FittedRepresentation::Tfidf {
                model,
                l2_normalize,
            } => {
                let x = tfidf_transform(docs, model);
                if *l2_normalize {
                    l2_normalize_rows(&x)
                } else {
                    x
                }
            }
            FittedRepresentation::Embedding { model } => embed_documents(docs, model),
        }
    }
}

/// A fitted reduction stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedReduction {
    SelectKBest { model: SelectionModel },
    Pca { model: PcaModel },
    Autoencoder { model: AeModel },
}

impl FittedReduction {
    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        match self {
            FittedReduction::SelectKBest { model } => select_transform(x, model),
            FittedReduction::Pca { model } => pca_transform(x, model),
            FittedReduction::Autoencoder { model } => ae_encode(x, model),
        }
    }
}

/// Every fitted stage of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub preprocess: PreprocessConfig,
    pub representation: FittedRepresentation,
    pub reduction: Option<FittedReduction>,
    pub classifier: TrainedClassifier,
    pub threshold: f64,
}

impl FittedPipeline {
    /// Fit every stage on the training corpus only.
    pub fn fit(config: &PipelineConfig, train: &Corpus) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::integrity("cannot fit on an empty corpus"));
        }
        let seed = config.evaluation.seed;
        let preprocess = config.preprocess.resolve()?;
        let docs: Vec<TokenSeq> = train
            .notes
            .iter()
            .map(|n| preprocess_text(&n.text, &preprocess))
            .collect();
        let y = train.labels();

        let representation = match &config.representation {
            RepresentationSection::Bow(section) => FittedRepresentation::Bow {
                vocabulary: build_vocab(&docs, section.min_df, section.max_features)?,
            },
            RepresentationSection::Tfidf(section) => {
                let vocabulary = build_vocab(&docs, section.min_df, section.max_features)?;
                FittedRepresentation::Tfidf {
                    model: tfidf_fit(&docs, &vocabulary, section.smoothing)?,
                    l2_normalize: section.l2_normalize,
                }
            }
            RepresentationSection::Embedding(section) => {
                let skipgram = SkipgramConfig {
                    dim: section.dim,
                    window: section.window,
                    epochs: section.epochs,
                    learning_rate: section.learning_rate,
                    min_count: section.min_count,
                    seed: stage_seed(seed, offsets::EMBEDDING),
                    mode: section.mode,
                };
                FittedRepresentation::Embedding {
                    model: skipgram_train(&docs, &skipgram)?,
                }
            }
        };

        let features = representation.transform(&docs);
        let (reduction, reduced) = match &config.reduction {
            ReductionSection::None => (None, features),
            ReductionSection::SelectKBest(section) => {
                // K is capped at the fitted width so one configuration can
                // serve folds with differing vocabularies.
                let k = section.k.min(features.n_cols());
                let model = select_k_best_fit(&features, &y, k)?;
                let reduced = select_transform(&features, &model)?;
                (Some(FittedReduction::SelectKBest { model }), reduced)
            }
            ReductionSection::Pca(section) => {
                let model = pca_fit(&features, section.n_components)?;
                let reduced = pca_transform(&features, &model)?;
                (Some(FittedReduction::Pca { model }), reduced)
            }
            ReductionSection::Autoencoder(section) => {
                let ae_config = AeConfig {
                    latent_size: section.latent_size,
                    epochs: section.epochs,
                    learning_rate: section.learning_rate,
                    momentum: section.momentum,
                    l2_penalty: section.l2_penalty,
                    batch_size: section.batch_size,
                    validation_fraction: section.validation_fraction,
                    seed: stage_seed(seed, offsets::REDUCER),
                };
                let model = ae_train(&features, &ae_config)?;
                let reduced = ae_encode(&features, &model)?;
                (Some(FittedReduction::Autoencoder { model }), reduced)
            }
        };

        let weights = class_weights(&y, config.classifier.balance());
        let classifier_seed = stage_seed(seed, offsets::CLASSIFIER);
        let classifier = match &config.classifier {
            ClassifierSection::Lr(section) => TrainedClassifier::Lr(lr_train(
                &reduced,
                &y,
                &LrConfig {
                    learning_rate: section.learning_rate,
                    epochs: section.epochs,
                    l2_penalty: section.l2_penalty,
                    seed: classifier_seed,
                },
                Some(weights),
            )?),
            ClassifierSection::Gnb(section) => {
                TrainedClassifier::Gnb(gnb_train(&reduced, &y, section.var_floor_ratio)?)
            }
            ClassifierSection::Mlp(section) => TrainedClassifier::Mlp(mlp_train(
                &reduced,
                &y,
                &MlpConfig {
                    hidden_size: section.hidden_size,
                    epochs: section.epochs,
                    learning_rate: section.learning_rate,
                    batch_size: section.batch_size,
                    dropout: section.dropout,
                    seed: classifier_seed,
                },
                Some(weights),
            )?),
        };

        Ok(FittedPipeline {
            preprocess,
            representation,
            reduction,
            classifier,
            threshold: config.evaluation.threshold,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        self.representation.vocabulary()
    }

    pub fn preprocess_texts<'a, I>(&self, texts: I) -> Vec<TokenSeq>
    where
        I: IntoIterator<Item = &'a str>,
    {
        texts
            .into_iter()
            .map(|t| preprocess_text(t, &self.preprocess))
            .collect()
    }

    /// Feature matrix for already-preprocessed documents.
    pub fn features(&self, docs: &[TokenSeq]) -> Result<FeatureMatrix> {
        let x = self.representation.transform(docs);
        match &self.reduction {
            Some(reduction) => reduction.transform(&x),
            None => Ok(x),
        }
    }

    /// Positive-class probability for raw note texts.
    pub fn predict_proba_texts<'a, I>(&self, texts: I) -> Result<Vec<f64>>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let docs = self.preprocess_texts(texts);
        let x = self.features(&docs)?;
        self.classifier.predict_proba(&x)
    }

    /// Probabilities for every note of a corpus.
    pub fn predict_proba_corpus(&self, corpus: &Corpus) -> Result<Vec<f64>> {
        self.predict_proba_texts(corpus.notes.iter().map(|n| n.text.as_str()))
    }
}
