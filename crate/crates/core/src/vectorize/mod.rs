//! Document representations: bag-of-words counts, TF-IDF weights and
//! averaged skip-gram embeddings.

mod skipgram;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::preprocess::TokenSeq;

pub use skipgram::{
    conditional_distribution, doc_embed, embed_documents, log_prob, skipgram_pair_gradients,
    skipgram_train, EmbeddingModel, SkipgramConfig, SkipgramMode,
};

/// Token-to-index bijection with document frequencies.
///
/// Indices are dense `0..len` in lexicographic token order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    tokens: Vec<String>,
    document_frequency: Vec<usize>,
    n_documents: usize,
    #[serde(skip)]
    lookup: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize, Clone)]
struct VocabularyData {
    tokens: Vec<String>,
    document_frequency: Vec<usize>,
    n_documents: usize,
}

impl From<VocabularyData> for Vocabulary {
    fn from(data: VocabularyData) -> Self {
        let lookup = data
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            tokens: data.tokens,
            document_frequency: data.document_frequency,
            n_documents: data.n_documents,
            lookup,
        }
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData {
            tokens: v.tokens,
            document_frequency: v.document_frequency,
            n_documents: v.n_documents,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index(&self, token: &str) -> Option<usize> {
        self.lookup.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }
}

/// Build a vocabulary from tokenized documents.
///
/// Tokens with document frequency below `min_df` are dropped; when
/// `max_features` is set, the most frequent tokens by total count win,
/// ties broken lexicographically.
pub fn build_vocab(
    docs: &[TokenSeq],
    min_df: usize,
    max_features: Option<usize>,
) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::config("cannot fit a vocabulary on zero documents"));
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    let mut total: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let mut seen = std::collections::HashSet::new();
        for token in doc {
            *total.entry(token.as_str()).or_default() += 1;
            if seen.insert(token.as_str()) {
                *df.entry(token.as_str()).or_default() += 1;
            }
        }
    }

    let mut kept: Vec<&str> = df
        .iter()
        .filter(|(_, &count)| count >= min_df.max(1))
        .map(|(&t, _)| t)
        .collect();
    if let Some(cap) = max_features {
        kept.sort_by(|a, b| total[b].cmp(&total[a]).then(a.cmp(b)));
        kept.truncate(cap);
    }
    kept.sort_unstable();

    if kept.is_empty() {
        return Err(Error::infeasible(
            "vocabulary is empty after frequency filtering",
        ));
    }

    let tokens: Vec<String> = kept.iter().map(|t| t.to_string()).collect();
    let document_frequency = kept.iter().map(|t| df[t]).collect();
    let lookup = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        tokens,
        document_frequency,
        n_documents: docs.len(),
        lookup,
    })
}

/// Raw token counts per document; out-of-vocabulary tokens are ignored.
pub fn bow_vectorize(docs: &[TokenSeq], vocab: &Vocabulary) -> FeatureMatrix {
    let rows = docs
        .iter()
        .map(|doc| {
            let mut counts: HashMap<usize, f64> = HashMap::new();
            for token in doc {
                if let Some(idx) = vocab.index(token) {
                    *counts.entry(idx).or_default() += 1.0;
                }
            }
            counts.into_iter().collect()
        })
        .collect();
    FeatureMatrix::sparse_from_rows(vocab.len(), rows)
}

/// TF-IDF weighting model. The inverse document frequency uses the natural
/// logarithm: `idf_t = ln(N / df_t)`, optionally smoothed to
/// `ln((1 + N) / (1 + df_t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocabulary: Vocabulary,
    pub idf: Vec<f64>,
    pub smoothed: bool,
}

/// Compute the idf vector from the vocabulary fitted on `docs`.
pub fn tfidf_fit(docs: &[TokenSeq], vocab: &Vocabulary, smoothed: bool) -> Result<TfidfModel> {
    if docs.len() != vocab.n_documents() {
        return Err(Error::config(format!(
            "vocabulary was fitted on {} documents, got {}",
            vocab.n_documents(),
            docs.len()
        )));
    }
    let n = vocab.n_documents() as f64;
    let idf = (0..vocab.len())
        .map(|i| {
            let df = vocab.document_frequency(i) as f64;
            if smoothed {
                ((1.0 + n) / (1.0 + df)).ln()
            } else {
                (n / df).ln()
            }
        })
        .collect();
    Ok(TfidfModel {
        vocabulary: vocab.clone(),
        idf,
        smoothed,
    })
}

/// Scale each row to unit Euclidean norm; zero rows pass through. Gradient
/// classifiers train far better on unit-length documents, so the pipeline
/// offers this on top of the raw weighting.
pub fn l2_normalize_rows(x: &FeatureMatrix) -> FeatureMatrix {
    match x {
        FeatureMatrix::Sparse(_) => {
            let rows = (0..x.n_rows())
                .map(|i| {
                    let entries: Vec<(usize, f64)> = x.row_nonzeros(i).collect();
                    let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        entries
                    } else {
                        entries.into_iter().map(|(j, v)| (j, v / norm)).collect()
                    }
                })
                .collect();
            FeatureMatrix::sparse_from_rows(x.n_cols(), rows)
        }
        FeatureMatrix::Dense(m) => {
            let mut out = m.clone();
            for i in 0..out.n_rows {
                let row = out.row_mut(i);
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for v in row {
                        *v /= norm;
                    }
                }
            }
            FeatureMatrix::Dense(out)
        }
    }
}

/// Weight documents: entry `(d, t) = (f_{t,d} / n_d) * idf_t` where `n_d`
/// counts every token of the document, in-vocabulary or not.
pub fn tfidf_transform(docs: &[TokenSeq], model: &TfidfModel) -> FeatureMatrix {
    let rows = docs
        .iter()
        .map(|doc| {
            let n_d = doc.len() as f64;
            if doc.is_empty() {
                log::warn!("empty document transforms to an all-zero row");
                return Vec::new();
            }
            let mut counts: HashMap<usize, f64> = HashMap::new();
            for token in doc {
                if let Some(idx) = model.vocabulary.index(token) {
                    *counts.entry(idx).or_default() += 1.0;
                }
            }
            counts
                .into_iter()
                .map(|(idx, f)| (idx, f / n_d * model.idf[idx]))
                .collect()
        })
        .collect();
    FeatureMatrix::sparse_from_rows(model.vocabulary.len(), rows)
}
