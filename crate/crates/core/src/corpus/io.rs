//! Corpus serialization: CSV (header row, UTF-8) and JSONL (one object per
//! line). Labels are written as "YES"/"NO"; "1"/"0" and bare JSON numbers
//! are accepted on input.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, Note};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    /// Infer from a file extension; defaults to JSONL.
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

const REQUIRED_COLUMNS: [&str; 5] = ["note_id", "patient_id", "care_provider_id", "text", "label"];

/// Parse a label cell: YES/NO/1/0, case-insensitive.
pub fn parse_label(raw: &str) -> Option<u8> {
    match raw.trim().to_ascii_uppercase().as_str() {
        "YES" | "1" => Some(1),
        "NO" | "0" => Some(0),
        _ => None,
    }
}

fn label_text(label: u8) -> &'static str {
    if label == 1 {
        "YES"
    } else {
        "NO"
    }
}

/// Load a labeled corpus.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    let notes = match format {
        CorpusFormat::Csv => load_csv(path)?,
        CorpusFormat::Jsonl => load_jsonl(path)?,
    };
    Corpus::from_notes(notes, path.display().to_string())
}

fn load_csv(path: &Path) -> Result<Vec<Note>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut column = std::collections::HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        column.insert(h.to_string(), i);
    }
    for required in REQUIRED_COLUMNS {
        if !column.contains_key(required) {
            return Err(Error::format(format!("missing column {required:?}")));
        }
    }
    let mut notes = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(notes.len() + 2);
        let field = |name: &str| record.get(column[name]).unwrap_or("").to_string();
        let raw_label = field("label");
        let label = parse_label(&raw_label).ok_or_else(|| Error::Row {
            line,
            message: format!("unparseable label {raw_label:?}"),
        })?;
        let text = field("text");
        if text.trim().is_empty() {
            return Err(Error::Row {
                line,
                message: "empty text".to_string(),
            });
        }
        notes.push(Note {
            note_id: field("note_id"),
            patient_id: field("patient_id"),
            care_provider_id: field("care_provider_id"),
            text,
            label,
        });
    }
    Ok(notes)
}

fn json_label(value: &serde_json::Value) -> Option<u8> {
    match value {
        serde_json::Value::String(s) => parse_label(s),
        serde_json::Value::Number(n) => match n.as_u64() {
            Some(0) => Some(0),
            Some(1) => Some(1),
            _ => None,
        },
        _ => None,
    }
}

fn load_jsonl(path: &Path) -> Result<Vec<Note>> {
    let raw = std::fs::read_to_string(path)?;
    let mut notes = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::Row {
                line: line_no,
                message: format!("invalid json: {e}"),
            })?;
        let get = |key: &str| -> Result<String> {
            value
                .get(key)
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .ok_or_else(|| Error::Row {
                    line: line_no,
                    message: format!("missing or non-string key {key:?}"),
                })
        };
        let label_value = value.get("label").ok_or_else(|| Error::Row {
            line: line_no,
            message: "missing key \"label\"".to_string(),
        })?;
        let label = json_label(label_value).ok_or_else(|| Error::Row {
            line: line_no,
            message: format!("unparseable label {label_value}"),
        })?;
        let text = get("text")?;
        if text.trim().is_empty() {
            return Err(Error::Row {
                line: line_no,
                message: "empty text".to_string(),
            });
        }
        notes.push(Note {
            note_id: get("note_id")?,
            patient_id: get("patient_id")?,
            care_provider_id: get("care_provider_id")?,
            text,
            label,
        });
    }
    Ok(notes)
}

/// Load notes for prediction: only `note_id` and `text` are required,
/// identifier and label fields are optional.
pub fn load_unlabeled(path: &Path, format: CorpusFormat) -> Result<Vec<(String, String)>> {
    match format {
        CorpusFormat::Jsonl => {
            let raw = std::fs::read_to_string(path)?;
            let mut out = Vec::new();
            for (idx, line) in raw.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let value: serde_json::Value =
                    serde_json::from_str(line).map_err(|e| Error::Row {
                        line: idx + 1,
                        message: format!("invalid json: {e}"),
                    })?;
                let get = |key: &str| {
                    value
                        .get(key)
                        .and_then(|v| v.as_str())
                        .map(str::to_string)
                        .ok_or_else(|| Error::Row {
                            line: idx + 1,
                            message: format!("missing or non-string key {key:?}"),
                        })
                };
                out.push((get("note_id")?, get("text")?));
            }
            Ok(out)
        }
        CorpusFormat::Csv => {
            let mut reader = csv::Reader::from_path(path)?;
            let headers = reader.headers()?.clone();
            let find = |name: &str| headers.iter().position(|h| h == name);
            let (id_col, text_col) = match (find("note_id"), find("text")) {
                (Some(i), Some(t)) => (i, t),
                (None, _) => return Err(Error::format("missing column \"note_id\"")),
                (_, None) => return Err(Error::format("missing column \"text\"")),
            };
            let mut out = Vec::new();
            for record in reader.records() {
                let record = record?;
                out.push((
                    record.get(id_col).unwrap_or("").to_string(),
                    record.get(text_col).unwrap_or("").to_string(),
                ));
            }
            Ok(out)
        }
    }
}

/// Write a corpus; labels serialize as YES/NO.
pub fn write_corpus(path: &Path, corpus: &Corpus, format: CorpusFormat) -> Result<()> {
    match format {
        CorpusFormat::Csv => {
            let mut writer = csv::Writer::from_path(path)?;
            writer.write_record(REQUIRED_COLUMNS)?;
            for note in &corpus.notes {
                writer.write_record([
                    note.note_id.as_str(),
                    note.patient_id.as_str(),
                    note.care_provider_id.as_str(),
                    note.text.as_str(),
                    label_text(note.label),
                ])?;
            }
            writer.flush()?;
        }
        CorpusFormat::Jsonl => {
            let mut out = String::new();
            for note in &corpus.notes {
                let row = serde_json::json!({
                    "note_id": note.note_id,
                    "patient_id": note.patient_id,
                    "care_provider_id": note.care_provider_id,
                    "text": note.text,
                    "label": label_text(note.label),
                });
                out.push_str(&serde_json::to_string(&row)?);
                out.push('\n');
            }
            std::fs::write(path, out)?;
        }
    }
    Ok(())
}
