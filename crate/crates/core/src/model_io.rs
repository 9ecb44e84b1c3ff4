//! Versioned model persistence.
//!
//! A fitted pipeline saves as a bundle directory with one JSON document per
//! stage plus a run manifest, so stages stay independently inspectable and
//! diffable. Every file carries a format version that is checked on load;
//! a mismatch is an explicit error, never a silent misread.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classify::TrainedClassifier;
use crate::error::{Error, Result};
use crate::pipeline::{FittedPipeline, FittedReduction, FittedRepresentation, PipelineConfig};
use crate::preprocess::PreprocessConfig;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

pub const PREPROCESS_FILE: &str = "preprocess.json";
pub const REPRESENTATION_FILE: &str = "representation.json";
pub const REDUCTION_FILE: &str = "reduction.json";
pub const CLASSIFIER_FILE: &str = "classifier.json";
pub const PIPELINE_FILE: &str = "pipeline.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce a run bit-identically, plus bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub app_version: String,
    pub config: PipelineConfig,
    pub seed: u64,
    pub corpus_path: String,
    pub corpus_digest: String,
    pub created_unix: u64,
}

#[derive(Serialize, Deserialize)]
struct StageFile<T> {
    format_version: u32,
    kind: String,
    payload: T,
}

#[derive(Serialize, Deserialize)]
struct PipelineMeta {
    threshold: f64,
    has_reduction: bool,
}

/// Write bytes through a temp file and rename, so readers never observe a
/// half-written document.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = dir.to_path_buf();
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("artifact");
    tmp.push(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn save_stage<T: Serialize>(dir: &Path, file: &str, kind: &str, payload: &T) -> Result<()> {
    let stage = StageFile {
        format_version: BUNDLE_FORMAT_VERSION,
        kind: kind.to_string(),
        payload,
    };
    let mut body = serde_json::to_string_pretty(&stage)?;
    body.push('\n');
    write_atomic(&dir.join(file), body.as_bytes())
}

fn load_stage<T: DeserializeOwned>(dir: &Path, file: &str) -> Result<T> {
    let raw = std::fs::read_to_string(dir.join(file))?;
    // Check the version before decoding the payload so version errors win
    // over shape errors.
    #[derive(Deserialize)]
    struct VersionOnly {
        format_version: u32,
    }
    let version: VersionOnly = serde_json::from_str(&raw)?;
    if version.format_version != BUNDLE_FORMAT_VERSION {
        return Err(Error::Version {
            found: version.format_version,
            supported: BUNDLE_FORMAT_VERSION,
        });
    }
    let stage: StageFile<T> = serde_json::from_str(&raw)?;
    Ok(stage.payload)
}

/// Save a fitted pipeline bundle into `dir` (created if missing).
pub fn save_pipeline(dir: &Path, pipeline: &FittedPipeline, manifest: &RunManifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    save_stage(dir, PREPROCESS_FILE, "preprocess", &pipeline.preprocess)?;
    save_stage(
        dir,
        REPRESENTATION_FILE,
        "representation",
        &pipeline.representation,
    )?;
    if let Some(reduction) = &pipeline.reduction {
        save_stage(dir, REDUCTION_FILE, "reduction", reduction)?;
    }
    save_stage(dir, CLASSIFIER_FILE, "classifier", &pipeline.classifier)?;
    save_stage(
        dir,
        PIPELINE_FILE,
        "pipeline",
        &PipelineMeta {
            threshold: pipeline.threshold,
            has_reduction: pipeline.reduction.is_some(),
        },
    )?;
    let mut body = serde_json::to_string_pretty(manifest)?;
    body.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), body.as_bytes())
}

/// Load a pipeline bundle saved by [`save_pipeline`].
pub fn load_pipeline(dir: &Path) -> Result<(FittedPipeline, RunManifest)> {
    let meta: PipelineMeta = load_stage(dir, PIPELINE_FILE)?;
    let preprocess: PreprocessConfig = load_stage(dir, PREPROCESS_FILE)?;
    let representation: FittedRepresentation = load_stage(dir, REPRESENTATION_FILE)?;
    let reduction: Option<FittedReduction> = if meta.has_reduction {
        Some(load_stage(dir, REDUCTION_FILE)?)
    } else {
        None
    };
    let classifier: TrainedClassifier = load_stage(dir, CLASSIFIER_FILE)?;
    let manifest_raw = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: RunManifest = serde_json::from_str(&manifest_raw)?;
    if manifest.format_version != BUNDLE_FORMAT_VERSION {
        return Err(Error::Version {
            found: manifest.format_version,
            supported: BUNDLE_FORMAT_VERSION,
        });
    }
    Ok((
        FittedPipeline {
            preprocess,
            representation,
            reduction,
            classifier,
            threshold: meta.threshold,
        },
        manifest,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SyntheticConfig};
    use crate::pipeline::{ReductionSection, SelectKBestSection};

    fn fitted() -> (FittedPipeline, RunManifest) {
        let corpus = generate_synthetic(&SyntheticConfig {
            n_notes: 60,
            min_tokens: 15,
            max_tokens: 25,
            noise_vocab_size: 40,
            seed: 1,
            ..SyntheticConfig::default()
        })
        .unwrap();
        let config = PipelineConfig {
            reduction: ReductionSection::SelectKBest(SelectKBestSection { k: 30 }),
            classifier: crate::pipeline::ClassifierSection::Lr(crate::pipeline::LrSection {
                epochs: 20,
                ..Default::default()
            }),
            ..PipelineConfig::default()
        };
        let pipeline = FittedPipeline::fit(&config, &corpus).unwrap();
        let manifest = RunManifest {
            format_version: BUNDLE_FORMAT_VERSION,
            app_version: "test".into(),
            config,
            seed: 0,
            corpus_path: "memory".into(),
            corpus_digest: "deadbeef".into(),
            created_unix: 0,
        };
        (pipeline, manifest)
    }

    #[test]
    fn bundle_round_trips_with_identical_predictions() {
        let (pipeline, manifest) = fitted();
        let dir = tempfile::tempdir().unwrap();
        save_pipeline(dir.path(), &pipeline, &manifest).unwrap();
        let (loaded, loaded_manifest) = load_pipeline(dir.path()).unwrap();
        assert_eq!(loaded, pipeline);
        assert_eq!(loaded_manifest, manifest);

        let texts = ["milrinone 0.5 mcg kg min", "ivrs toux rhinorrhee"];
        let original = pipeline.predict_proba_texts(texts).unwrap();
        let reloaded = loaded.predict_proba_texts(texts).unwrap();
        for (a, b) in original.iter().zip(&reloaded) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn stale_format_version_is_rejected() {
        let (pipeline, manifest) = fitted();
        let dir = tempfile::tempdir().unwrap();
        save_pipeline(dir.path(), &pipeline, &manifest).unwrap();
        // Corrupt the version field of one stage.
        let path = dir.path().join(CLASSIFIER_FILE);
        let body = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 99");
        std::fs::write(&path, body).unwrap();
        let err = load_pipeline(dir.path()).unwrap_err();
        assert!(
            matches!(err, Error::Version { found: 99, supported: 1 }),
            "{err}"
        );
    }

    #[test]
    fn saved_bundles_are_byte_deterministic() {
        let (pipeline, manifest) = fitted();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        save_pipeline(dir_a.path(), &pipeline, &manifest).unwrap();
        save_pipeline(dir_b.path(), &pipeline, &manifest).unwrap();
        for file in [
            PREPROCESS_FILE,
            REPRESENTATION_FILE,
            REDUCTION_FILE,
            CLASSIFIER_FILE,
            PIPELINE_FILE,
            MANIFEST_FILE,
        ] {
            let a = std::fs::read(dir_a.path().join(file)).unwrap();
            let b = std::fs::read(dir_b.path().join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical saves");
        }
    }
}
