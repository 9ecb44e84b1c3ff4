//! Application configuration file: the pipeline sections plus an optional
//! `[synthetic]` block for the corpus generator. Unknown keys anywhere are
//! parse errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use clinote_core::corpus::SyntheticConfig;
use clinote_core::pipeline::{
    ClassifierSection, EvaluationSection, PipelineConfig, PreprocessSection, ReductionSection,
    RepresentationSection,
};
use clinote_core::{Error, Result};

/// Generator settings; only the seed is mandatory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub seed: u64,
    #[serde(default = "SyntheticSection::default_n_notes")]
    pub n_notes: usize,
    #[serde(default = "SyntheticSection::default_positive_rate")]
    pub positive_rate: f64,
    #[serde(default = "SyntheticSection::default_signal_terms")]
    pub signal_terms_per_class: usize,
    #[serde(default = "SyntheticSection::default_noise_vocab")]
    pub noise_vocab_size: usize,
    #[serde(default = "SyntheticSection::default_injection")]
    pub numeric_injection_rate: f64,
    #[serde(default = "SyntheticSection::default_negation")]
    pub negation_rate: f64,
    #[serde(default = "SyntheticSection::default_min_tokens")]
    pub min_tokens: usize,
    #[serde(default = "SyntheticSection::default_max_tokens")]
    pub max_tokens: usize,
    #[serde(default = "SyntheticSection::default_cross_signal")]
    pub cross_signal_rate: f64,
}

impl SyntheticSection {
    fn default_n_notes() -> usize {
        1000
    }
    fn default_positive_rate() -> f64 {
        0.3565
    }
    fn default_signal_terms() -> usize {
        12
    }
    fn default_noise_vocab() -> usize {
        300
    }
    fn default_injection() -> f64 {
        0.6
    }
    fn default_negation() -> f64 {
        0.2
    }
    fn default_min_tokens() -> usize {
        50
    }
    fn default_max_tokens() -> usize {
        125
    }
    fn default_cross_signal() -> f64 {
        0.04
    }

    pub fn to_config(&self) -> SyntheticConfig {
        SyntheticConfig {
            n_notes: self.n_notes,
            positive_rate: self.positive_rate,
            signal_terms_per_class: self.signal_terms_per_class,
            noise_vocab_size: self.noise_vocab_size,
            numeric_injection_rate: self.numeric_injection_rate,
            negation_rate: self.negation_rate,
            min_tokens: self.min_tokens,
            max_tokens: self.max_tokens,
            cross_signal_rate: self.cross_signal_rate,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSection>,
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

impl AppConfig {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            preprocess: self.preprocess.clone(),
            representation: self.representation.clone(),
            reduction: self.reduction.clone(),
            classifier: self.classifier.clone(),
            evaluation: self.evaluation.clone(),
        }
    }
}

/// Read and validate a configuration file; a missing `--config` means
/// defaults everywhere.
pub fn load_app_config(path: Option<&Path>) -> Result<AppConfig> {
    let Some(path) = path else {
        return Ok(AppConfig::default());
    };
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&raw).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}
