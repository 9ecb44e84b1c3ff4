//! Small helpers: content digests, manifest assembly, report emission.

use std::path::{Path, PathBuf};

use clinote_core::model_io::{write_atomic, RunManifest, BUNDLE_FORMAT_VERSION};
use clinote_core::pipeline::PipelineConfig;
use clinote_core::Result;

/// FNV-1a 64-bit digest, hex encoded. Identifies the exact input bytes in
/// run manifests.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

pub fn digest_file(path: &Path) -> Result<String> {
    Ok(fnv1a_hex(&std::fs::read(path)?))
}

/// Seconds since the epoch; honors SOURCE_DATE_EPOCH so runs can be made
/// byte-reproducible.
pub fn timestamp() -> u64 {
    if let Ok(raw) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(fixed) = raw.parse() {
            return fixed;
        }
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn build_manifest(
    config: &PipelineConfig,
    corpus_path: &Path,
    corpus_digest: String,
) -> RunManifest {
    RunManifest {
        format_version: BUNDLE_FORMAT_VERSION,
        app_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        seed: config.evaluation.seed,
        corpus_path: corpus_path.display().to_string(),
        corpus_digest,
        created_unix: timestamp(),
    }
}

/// Interpret `--out` as a stem: `reports/cv.json` and `reports/cv` both
/// yield `reports/cv.json` + `reports/cv.csv`.
pub fn out_stem(path: &Path) -> PathBuf {
    if path.extension().map_or(false, |e| e == "json") {
        path.with_extension("")
    } else {
        path.to_path_buf()
    }
}

/// Write a serializable report as pretty JSON to the path or stdout.
pub fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    match out {
        Some(path) => write_atomic(path, body.as_bytes()),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Render an optional metric for CSV: empty cell when undefined.
pub fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
