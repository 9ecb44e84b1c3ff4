//! Command implementations.

use std::path::Path;

use clinote_core::classify::predict_label;
use clinote_core::corpus::{
    self, corpus_stats, generate_synthetic, load_corpus, load_unlabeled, write_corpus, Corpus,
    CorpusFormat, SplitSpec, StatsOptions,
};
use clinote_core::evaluate::{
    bi3, cross_validate, learning_curve, Bi3Report, CvReport, LearningCurve, PosteriorEstimator,
};
use clinote_core::model_io::{load_pipeline, save_pipeline, write_atomic};
use clinote_core::pipeline::{FittedPipeline, PipelineConfig, RepresentationSection};
use clinote_core::rng::{offsets, stage_seed};
use clinote_core::{Error, Result};

use crate::config::AppConfig;
use crate::util::{build_manifest, csv_opt, digest_file, emit_json, out_stem};

fn corpus_format(path: &Path, expl: Option<CorpusFormat>) -> CorpusFormat {
    expl.unwrap_or_else(|| CorpusFormat::from_path(path))
}

fn require_out<'a>(out: Option<&'a Path>, what: &str) -> Result<&'a Path> {
    out.ok_or_else(|| Error::config(format!("--out is required to write {what}")))
}

pub fn cmd_generate(config: &AppConfig, out: Option<&Path>) -> Result<()> {
    let synthetic = config
        .synthetic
        .as_ref()
        .ok_or_else(|| Error::config("config has no [synthetic] section"))?;
    let out = require_out(out, "the generated corpus")?;
    let corpus = generate_synthetic(&synthetic.to_config())?;
    write_corpus(out, &corpus, CorpusFormat::from_path(out))?;
    println!(
        "wrote {} notes ({} positive, {} negative) to {}",
        corpus.len(),
        corpus.positive_count(),
        corpus.len() - corpus.positive_count(),
        out.display()
    );
    Ok(())
}

pub fn cmd_train(
    config: &PipelineConfig,
    corpus_path: &Path,
    format: Option<CorpusFormat>,
    out: Option<&Path>,
) -> Result<()> {
    let out = require_out(out, "the model bundle")?;
    let corpus = load_corpus(corpus_path, corpus_format(corpus_path, format))?;
    let spec = SplitSpec {
        train_fraction: config.evaluation.train_fraction,
        seed: stage_seed(config.evaluation.seed, offsets::SPLIT),
        group_keys: config.evaluation.group_keys.clone(),
    };
    let (train, test) = corpus::split_train_test(&corpus, &spec)?;
    let leakage = corpus::check_leakage(&train, &test, &spec.group_keys);
    if !leakage.is_clean() {
        return Err(Error::integrity(format!(
            "split produced {} shared identifiers",
            leakage.violations.len()
        )));
    }

    let pipeline = FittedPipeline::fit(config, &train)?;
    let probabilities = pipeline.predict_proba_corpus(&test)?;
    let predicted = predict_label(&probabilities, pipeline.threshold)?;
    let counts = clinote_core::evaluate::confusion(&test.labels(), &predicted)?;
    let metrics = clinote_core::evaluate::metrics(&counts);

    let manifest = build_manifest(config, corpus_path, digest_file(corpus_path)?);
    save_pipeline(out, &pipeline, &manifest)?;

    let summary = serde_json::json!({
        "n_train": train.len(),
        "n_test": test.len(),
        "confusion": counts,
        "metrics": metrics,
        "bundle": out.display().to_string(),
    });
    let mut body = serde_json::to_string_pretty(&summary)?;
    body.push('\n');
    write_atomic(&out.join("holdout_metrics.json"), body.as_bytes())?;
    print!("{body}");
    Ok(())
}

fn cv_csv(report: &CvReport) -> String {
    let mut csv = String::from("fold,n_train,n_validation,accuracy,precision,recall,f1\n");
    for fold in &report.folds {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fold.fold,
            fold.n_train,
            fold.n_validation,
            csv_opt(fold.metrics.accuracy),
            csv_opt(fold.metrics.precision),
            csv_opt(fold.metrics.recall),
            csv_opt(fold.metrics.f1),
        ));
    }
    csv
}

pub fn cmd_cv(
    config: &PipelineConfig,
    corpus_path: &Path,
    format: Option<CorpusFormat>,
    out: Option<&Path>,
    threads: usize,
) -> Result<()> {
    let corpus = load_corpus(corpus_path, corpus_format(corpus_path, format))?;
    let report = cross_validate(&corpus, config, threads)?;
    match out {
        Some(out) => {
            let stem = out_stem(out);
            emit_json(&report, Some(&stem.with_extension("json")))?;
            write_atomic(&stem.with_extension("csv"), cv_csv(&report).as_bytes())?;
        }
        None => emit_json(&report, None)?,
    }
    eprintln!(
        "cv: k={} accuracy mean={} std={}",
        report.k,
        csv_opt(report.mean.accuracy),
        csv_opt(report.std.accuracy),
    );
    Ok(())
}

pub fn cmd_predict(
    model_dir: &Path,
    input: &Path,
    format: Option<CorpusFormat>,
    out: Option<&Path>,
) -> Result<()> {
    let out = require_out(out, "predictions")?;
    let (pipeline, _manifest) = load_pipeline(model_dir)?;
    let rows = load_unlabeled(input, corpus_format(input, format))?;
    let texts: Vec<&str> = rows.iter().map(|(_, text)| text.as_str()).collect();
    let probabilities = pipeline.predict_proba_texts(texts)?;
    let labels = predict_label(&probabilities, pipeline.threshold)?;

    let as_csv = out.extension().map_or(false, |e| e == "csv");
    let mut body = String::new();
    if as_csv {
        body.push_str("note_id,probability,label\n");
    }
    for (((note_id, _), probability), label) in rows.iter().zip(&probabilities).zip(&labels) {
        let label_text = if *label == 1 { "YES" } else { "NO" };
        if as_csv {
            body.push_str(&format!("{note_id},{probability},{label_text}\n"));
        } else {
            let row = serde_json::json!({
                "note_id": note_id,
                "probability": probability,
                "label": label_text,
            });
            body.push_str(&serde_json::to_string(&row)?);
            body.push('\n');
        }
    }
    write_atomic(out, body.as_bytes())?;
    eprintln!("scored {} notes into {}", rows.len(), out.display());
    Ok(())
}

pub fn cmd_report_stats(
    config: &AppConfig,
    corpus_path: &Path,
    format: Option<CorpusFormat>,
    top_n: usize,
    raw_tokens: bool,
    out: Option<&Path>,
) -> Result<()> {
    let corpus = load_corpus(corpus_path, corpus_format(corpus_path, format))?;
    let options = StatsOptions {
        preprocess: if raw_tokens {
            None
        } else {
            Some(config.preprocess.resolve()?)
        },
        top_n,
        ..StatsOptions::default()
    };
    let report = corpus_stats(&corpus, &options)?;
    emit_json(&report, out)
}

fn bi3_csv(report: &Bi3Report) -> String {
    let mut csv = String::from("positive_sample,ibi3\n");
    for (i, value) in report.per_sample.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", csv_opt(*value)));
    }
    csv
}

/// Features for the imbalance report: preprocessing plus representation
/// fitted on the full corpus (a dataset diagnostic, not a predictive run).
fn full_corpus_features(
    config: &PipelineConfig,
    corpus: &Corpus,
) -> Result<clinote_core::FeatureMatrix> {
    let preprocess = config.preprocess.resolve()?;
    let docs: Vec<_> = corpus
        .notes
        .iter()
        .map(|n| clinote_core::preprocess::preprocess_text(&n.text, &preprocess))
        .collect();
    match &config.representation {
        RepresentationSection::Bow(section) => {
            let vocab =
                clinote_core::vectorize::build_vocab(&docs, section.min_df, section.max_features)?;
            Ok(clinote_core::vectorize::bow_vectorize(&docs, &vocab))
        }
        RepresentationSection::Tfidf(section) => {
            let vocab =
                clinote_core::vectorize::build_vocab(&docs, section.min_df, section.max_features)?;
            let model = clinote_core::vectorize::tfidf_fit(&docs, &vocab, section.smoothing)?;
            Ok(clinote_core::vectorize::tfidf_transform(&docs, &model))
        }
        RepresentationSection::Embedding(section) => {
            let skipgram = clinote_core::vectorize::SkipgramConfig {
                dim: section.dim,
                window: section.window,
                epochs: section.epochs,
                learning_rate: section.learning_rate,
                min_count: section.min_count,
                seed: stage_seed(config.evaluation.seed, offsets::EMBEDDING),
                mode: section.mode,
            };
            let model = clinote_core::vectorize::skipgram_train(&docs, &skipgram)?;
            Ok(clinote_core::vectorize::embed_documents(&docs, &model))
        }
    }
}

pub fn cmd_report_bi3(
    config: &AppConfig,
    corpus_path: &Path,
    format: Option<CorpusFormat>,
    out: Option<&Path>,
) -> Result<()> {
    let corpus = load_corpus(corpus_path, corpus_format(corpus_path, format))?;
    let pipeline = config.pipeline();
    let x = full_corpus_features(&pipeline, &corpus)?;
    let report = bi3(&x, &corpus.labels(), PosteriorEstimator::default())?;
    match out {
        Some(out) => {
            let stem = out_stem(out);
            emit_json(&report, Some(&stem.with_extension("json")))?;
            write_atomic(&stem.with_extension("csv"), bi3_csv(&report).as_bytes())?;
        }
        None => emit_json(&report, None)?,
    }
    Ok(())
}

fn curve_csv(curve: &LearningCurve) -> String {
    let mut csv = String::from("size,fold,train_score,validation_score\n");
    for p in &curve.points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.size,
            p.fold,
            csv_opt(p.train_score),
            csv_opt(p.validation_score),
        ));
    }
    csv
}

pub fn cmd_report_learning_curve(
    config: &PipelineConfig,
    corpus_path: &Path,
    format: Option<CorpusFormat>,
    sizes: &[usize],
    out: Option<&Path>,
) -> Result<()> {
    let corpus = load_corpus(corpus_path, corpus_format(corpus_path, format))?;
    let curve = learning_curve(&corpus, config, sizes)?;
    match out {
        Some(out) => {
            let stem = out_stem(out);
            emit_json(&curve, Some(&stem.with_extension("json")))?;
            write_atomic(&stem.with_extension("csv"), curve_csv(&curve).as_bytes())?;
        }
        None => emit_json(&curve, None)?,
    }
    Ok(())
}
