//! Per-class corpus statistics: lengths, digit counts, token-length
//! histogram and top token frequencies.

use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};
use crate::preprocess::{normalize_and_tokenize, preprocess_text, PreprocessConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsOptions {
    /// When set, token statistics run on preprocessed tokens instead of the
    /// plain lowercased tokenization.
    pub preprocess: Option<PreprocessConfig>,
    pub top_n: usize,
    pub histogram_bin_width: usize,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            preprocess: None,
            top_n: 20,
            histogram_bin_width: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    /// Inclusive lower bound in tokens.
    pub lo: usize,
    /// Exclusive upper bound in tokens.
    pub hi: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenCount {
    pub token: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    /// None for the whole-corpus block.
    pub label: Option<u8>,
    pub n_notes: usize,
    pub mean_chars: f64,
    pub mean_digits: f64,
    pub token_length_histogram: Vec<HistogramBin>,
    pub top_tokens: Vec<TokenCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub n_notes: usize,
    pub positive_count: usize,
    pub positive_fraction: f64,
    pub negative: ClassStats,
    pub positive: ClassStats,
    pub overall: ClassStats,
}

fn class_stats(
    docs: &[(&str, &[String])],
    label: Option<u8>,
    options: &StatsOptions,
) -> ClassStats {
    let n = docs.len();
    let mean = |total: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    let total_chars: usize = docs.iter().map(|(text, _)| text.chars().count()).sum();
    let total_digits: usize = docs
        .iter()
        .map(|(text, _)| text.chars().filter(char::is_ascii_digit).count())
        .sum();

    let width = options.histogram_bin_width.max(1);
    let max_len = docs.iter().map(|(_, t)| t.len()).max().unwrap_or(0);
    let n_bins = max_len / width + 1;
    let mut histogram: Vec<HistogramBin> = (0..n_bins)
        .map(|b| HistogramBin {
            lo: b * width,
            hi: (b + 1) * width,
            count: 0,
        })
        .collect();
    for (_, tokens) in docs {
        histogram[tokens.len() / width].count += 1;
    }

    let mut counts: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
    for (_, tokens) in docs {
        for t in tokens.iter() {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut top: Vec<TokenCount> = counts
        .into_iter()
        .map(|(token, count)| TokenCount {
            token: token.to_string(),
            count,
        })
        .collect();
    top.sort_by(|a, b| b.count.cmp(&a.count).then(a.token.cmp(&b.token)));
    top.truncate(options.top_n);

    ClassStats {
        label,
        n_notes: n,
        mean_chars: mean(total_chars),
        mean_digits: mean(total_digits),
        token_length_histogram: histogram,
        top_tokens: top,
    }
}

/// Summarize a corpus per class and overall.
pub fn corpus_stats(corpus: &Corpus, options: &StatsOptions) -> Result<StatsReport> {
    if corpus.is_empty() {
        return Err(Error::integrity("cannot summarize an empty corpus"));
    }
    let tokenized: Vec<(u8, &str, Vec<String>)> = corpus
        .notes
        .iter()
        .map(|n| {
            let tokens = match &options.preprocess {
                Some(cfg) => preprocess_text(&n.text, cfg),
                None => normalize_and_tokenize(&n.text),
            };
            (n.label, n.text.as_str(), tokens)
        })
        .collect();

    let by_label = |label: u8| -> Vec<(&str, &[String])> {
        tokenized
            .iter()
            .filter(|(l, _, _)| *l == label)
            .map(|(_, text, tokens)| (*text, tokens.as_slice()))
            .collect()
    };
    let all: Vec<(&str, &[String])> = tokenized
        .iter()
        .map(|(_, text, tokens)| (*text, tokens.as_slice()))
        .collect();

    Ok(StatsReport {
        n_notes: corpus.len(),
        positive_count: corpus.positive_count(),
        positive_fraction: corpus.positive_fraction(),
        negative: class_stats(&by_label(0), Some(0), options),
        positive: class_stats(&by_label(1), Some(1), options),
        overall: class_stats(&all, None, options),
    })
}
