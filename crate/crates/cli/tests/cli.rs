//! End-to-end checks of the `clinote` binary: command wiring, exit codes
//! and output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_clinote"));
    // A fixed epoch keeps every emitted manifest byte-identical.
    cmd.env("SOURCE_DATE_EPOCH", "1700000000");
    cmd
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

fn base_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.toml");
    write(
        &path,
        r#"
[synthetic]
seed = 7
n_notes = 150
min_tokens = 25
max_tokens = 45
noise_vocab_size = 80

[representation.tfidf]
min_df = 2

[reduction.select_k_best]
k = 120

[classifier.lr]
epochs = 60
learning_rate = 10.0

[evaluation]
k = 4
seed = 3
"#,
    );
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn assert_ok(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn code(output: &Output) -> i32 {
    output.status.code().unwrap_or(-1)
}

#[test]
fn generate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    let corpus_a = dir.path().join("a.jsonl");
    let corpus_b = dir.path().join("b.jsonl");
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        corpus_a.to_str().unwrap(),
        "generate",
    ]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("150 notes"));
    assert_ok(&run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        corpus_b.to_str().unwrap(),
        "generate",
    ]));
    assert_eq!(
        std::fs::read(&corpus_a).unwrap(),
        std::fs::read(&corpus_b).unwrap()
    );
}

#[test]
fn generate_without_synthetic_section_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("nosynth.toml");
    write(&config, "[evaluation]\nseed = 1\n");
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("x.jsonl").to_str().unwrap(),
        "generate",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("synthetic"));
}

#[test]
fn missing_seed_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("noseed.toml");
    write(&config, "[synthetic]\nn_notes = 10\n");
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("x.jsonl").to_str().unwrap(),
        "generate",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("typo.toml");
    write(&config, "[preprocess]\nstratergy = \"dot_encode\"\n");
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("x.jsonl").to_str().unwrap(),
        "generate",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stratergy"));
}

#[test]
fn train_cv_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    let corpus = dir.path().join("corpus.jsonl");
    assert_ok(&run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        corpus.to_str().unwrap(),
        "generate",
    ]));

    // Train writes a bundle and prints holdout metrics.
    let bundle = dir.path().join("model");
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        bundle.to_str().unwrap(),
        "train",
        corpus.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"metrics\""), "{stdout}");
    for file in [
        "preprocess.json",
        "representation.json",
        "reduction.json",
        "classifier.json",
        "pipeline.json",
        "manifest.json",
        "holdout_metrics.json",
    ] {
        assert!(bundle.join(file).exists(), "missing {file}");
    }

    // Cross-validation emits JSON and CSV.
    let report = dir.path().join("cv.json");
    assert_ok(&run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "cv",
        corpus.to_str().unwrap(),
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["k"], 4);
    assert_eq!(parsed["folds"].as_array().unwrap().len(), 4);
    let csv = std::fs::read_to_string(dir.path().join("cv.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    // The --k flag overrides the configured fold count.
    assert_ok(&run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "cv",
        corpus.to_str().unwrap(),
        "--k",
        "2",
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["folds"].as_array().unwrap().len(), 2);

    // Predict scores unlabeled notes, including a stopword-only one.
    let input = dir.path().join("input.jsonl");
    write(
        &input,
        "{\"note_id\":\"q1\",\"text\":\"milrinone dobutamine fe 40.5 %\"}\n{\"note_id\":\"q2\",\"text\":\"le la les et en\"}\n",
    );
    let predictions = dir.path().join("pred.jsonl");
    assert_ok(&run(&[
        "--out",
        predictions.to_str().unwrap(),
        "predict",
        input.to_str().unwrap(),
        "--model",
        bundle.to_str().unwrap(),
    ]));
    let lines: Vec<String> = std::fs::read_to_string(&predictions)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(lines.len(), 2);
    let row: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    assert_eq!(row["note_id"], "q2");
    assert!(row["probability"].as_f64().unwrap().is_finite());
    assert!(row["label"] == "YES" || row["label"] == "NO");
}

#[test]
fn stale_bundle_version_is_an_explicit_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    let corpus = dir.path().join("corpus.jsonl");
    assert_ok(&run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        corpus.to_str().unwrap(),
        "generate",
    ]));
    let bundle = dir.path().join("model");
    assert_ok(&run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        bundle.to_str().unwrap(),
        "train",
        corpus.to_str().unwrap(),
    ]));
    let classifier = bundle.join("classifier.json");
    let body = std::fs::read_to_string(&classifier)
        .unwrap()
        .replace("\"format_version\": 1", "\"format_version\": 0");
    std::fs::write(&classifier, body).unwrap();

    let input = dir.path().join("input.jsonl");
    write(&input, "{\"note_id\":\"q1\",\"text\":\"toux ivrs\"}\n");
    let out = run(&[
        "--out",
        dir.path().join("p.jsonl").to_str().unwrap(),
        "predict",
        input.to_str().unwrap(),
        "--model",
        bundle.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));
}

#[test]
fn corrupt_corpus_exits_with_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    let corpus = dir.path().join("bad.jsonl");
    write(&corpus, "{\"note_id\":\"n1\",\"text\":\"a\"}\nnot json\n");
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("m").to_str().unwrap(),
        "train",
        corpus.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn report_subcommands_emit_documents() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    let corpus = dir.path().join("corpus.jsonl");
    assert_ok(&run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        corpus.to_str().unwrap(),
        "generate",
    ]));

    // stats to stdout
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "report",
        "stats",
        corpus.to_str().unwrap(),
        "--top-n",
        "5",
    ]);
    assert_ok(&out);
    let stats: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(stats["n_notes"], 150);
    assert!(stats["positive"]["top_tokens"].as_array().unwrap().len() <= 5);

    // bi3 to files
    let bi3 = dir.path().join("bi3.json");
    assert_ok(&run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        bi3.to_str().unwrap(),
        "report",
        "bi3",
        corpus.to_str().unwrap(),
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&bi3).unwrap()).unwrap();
    assert!(parsed["aggregate"].is_number());
    assert!(dir.path().join("bi3.csv").exists());

    // learning curve to files
    let curve = dir.path().join("curve.json");
    assert_ok(&run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        curve.to_str().unwrap(),
        "report",
        "learning-curve",
        corpus.to_str().unwrap(),
        "--sizes",
        "20,40,80",
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&curve).unwrap()).unwrap();
    assert_eq!(parsed["points"].as_array().unwrap().len(), 12);
    let csv = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn every_command_is_byte_reproducible() {
    // Relative paths inside each working directory keep the run manifests
    // free of run-specific absolute paths.
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        base_config(dir);
        let run_in = |args: &[&str]| {
            let out = bin().current_dir(dir).args(args).output().unwrap();
            assert_ok(&out);
        };
        run_in(&["--config", "config.toml", "--out", "corpus.jsonl", "generate"]);
        run_in(&["--config", "config.toml", "--out", "model", "train", "corpus.jsonl"]);
        run_in(&["--config", "config.toml", "--out", "cv.json", "cv", "corpus.jsonl"]);
    }
    for file in [
        "corpus.jsonl",
        "cv.json",
        "cv.csv",
        "model/classifier.json",
        "model/manifest.json",
        "model/holdout_metrics.json",
    ] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn usage_errors_exit_one() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(code(&out), 1);
    let out = bin().args(["report", "nonsense", "x.jsonl"]).output().unwrap();
    assert_eq!(code(&out), 1);
}
