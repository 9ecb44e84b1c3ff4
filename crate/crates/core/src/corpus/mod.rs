//! Labeled narrative corpora: ingestion, contamination-free splits and
//! folds, statistics and a seeded synthetic generator.
//!
//! Splits and folds operate on groups, never on single notes: all notes
//! sharing a patient or care-provider identifier land on the same side, so
//! no identifier ever appears in both the training and the evaluation
//! cohort.

mod io;
mod stats;
mod synthetic;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use io::{load_corpus, load_unlabeled, parse_label, write_corpus, CorpusFormat};
pub use stats::{corpus_stats, ClassStats, HistogramBin, StatsOptions, StatsReport, TokenCount};
pub use synthetic::{generate_synthetic, SyntheticConfig};

/// One labeled clinical narrative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Note {
    pub note_id: String,
    pub patient_id: String,
    pub care_provider_id: String,
    pub text: String,
    /// 1 = condition present, 0 = absent.
    pub label: u8,
}

/// Identifier columns a split may be grouped by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    PatientId,
    CareProviderId,
}

impl GroupKey {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupKey::PatientId => "patient_id",
            GroupKey::CareProviderId => "care_provider_id",
        }
    }

    pub fn value_of(self, note: &Note) -> &str {
        match self {
            GroupKey::PatientId => &note.patient_id,
            GroupKey::CareProviderId => &note.care_provider_id,
        }
    }
}

/// A set of notes with unique ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub notes: Vec<Note>,
    pub provenance: String,
}

impl Corpus {
    /// Build a corpus, enforcing id uniqueness, label domain and non-empty
    /// text.
    pub fn from_notes(notes: Vec<Note>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for note in &notes {
            if !seen.insert(note.note_id.as_str()) {
                return Err(Error::integrity(format!(
                    "duplicate note_id {:?}",
                    note.note_id
                )));
            }
            if note.label > 1 {
                return Err(Error::integrity(format!(
                    "note {:?} has label {} outside {{0,1}}",
                    note.note_id, note.label
                )));
            }
            if note.text.trim().is_empty() {
                return Err(Error::integrity(format!(
                    "note {:?} has empty text",
                    note.note_id
                )));
            }
        }
        Ok(Corpus {
            notes,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.notes.iter().map(|n| n.label).collect()
    }

    pub fn positive_count(&self) -> usize {
        self.notes.iter().filter(|n| n.label == 1).count()
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.notes.is_empty() {
            return 0.0;
        }
        self.positive_count() as f64 / self.notes.len() as f64
    }

    /// Distinct values of one group key.
    pub fn group_values(&self, key: GroupKey) -> BTreeSet<&str> {
        self.notes.iter().map(|n| key.value_of(n)).collect()
    }

    fn subset(&self, keep: impl Fn(usize) -> bool, provenance: String) -> Corpus {
        Corpus {
            notes: self
                .notes
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, n)| n.clone())
                .collect(),
            provenance,
        }
    }
}

/// Parameters of a group-wise train/test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub group_keys: Vec<GroupKey>,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            seed: 0,
            group_keys: vec![GroupKey::PatientId, GroupKey::CareProviderId],
        }
    }
}

/// Union-find over note indices: notes sharing any group-key value merge
/// into one component, the unit of assignment for splits and folds.
fn group_components(corpus: &Corpus, group_keys: &[GroupKey]) -> Vec<Vec<usize>> {
    let n = corpus.len();
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }

    for &key in group_keys {
        let mut first_seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, note) in corpus.notes.iter().enumerate() {
            let value = key.value_of(note);
            match first_seen.get(value) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
                None => {
                    first_seen.insert(value, i);
                }
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(i);
    }
    // Keyed by smallest member index for a stable ordering.
    let mut out: Vec<Vec<usize>> = components.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

fn validate_group_keys(corpus: &Corpus, group_keys: &[GroupKey]) -> Result<()> {
    if group_keys.is_empty() {
        return Err(Error::config("group_keys must not be empty"));
    }
    for &key in group_keys {
        if corpus.group_values(key).len() < 2 {
            return Err(Error::infeasible(format!(
                "group key {} has fewer than 2 distinct values",
                key.as_str()
            )));
        }
    }
    Ok(())
}

/// Group-wise train/test split: whole components are assigned to the train
/// side in shuffled order until it reaches the requested note fraction.
pub fn split_train_test(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::config(format!(
            "train_fraction must lie in (0,1), got {}",
            spec.train_fraction
        )));
    }
    validate_group_keys(corpus, &spec.group_keys)?;

    let mut components = group_components(corpus, &spec.group_keys);
    let n = corpus.len();
    let target = spec.train_fraction * n as f64;
    if let Some(big) = components.iter().find(|c| c.len() as f64 > target) {
        return Err(Error::infeasible(format!(
            "a single group holds {} of {} notes, exceeding the train fraction {}",
            big.len(),
            n,
            spec.train_fraction
        )));
    }

    let mut rng = rng::seeded(spec.seed);
    rng::shuffle(&mut components, &mut rng);

    let mut in_train = vec![false; n];
    let mut train_count = 0usize;
    for component in &components {
        if (train_count as f64) < target {
            for &i in component {
                in_train[i] = true;
            }
            train_count += component.len();
        }
    }
    if train_count == n {
        return Err(Error::infeasible(
            "grouping leaves no notes for the test side",
        ));
    }

    let train = corpus.subset(|i| in_train[i], format!("{}#train", corpus.provenance));
    let test = corpus.subset(|i| !in_train[i], format!("{}#test", corpus.provenance));
    Ok((train, test))
}

/// One shared group-key value found on both sides of a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageViolation {
    pub key: GroupKey,
    pub value: String,
}

/// Report of identifier values shared between two corpora.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub violations: Vec<LeakageViolation>,
}

impl LeakageReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// List every group-key value present in both corpora.
pub fn check_leakage(train: &Corpus, test: &Corpus, group_keys: &[GroupKey]) -> LeakageReport {
    let mut violations = Vec::new();
    for &key in group_keys {
        let train_values = train.group_values(key);
        let test_values = test.group_values(key);
        for value in train_values.intersection(&test_values) {
            violations.push(LeakageViolation {
                key,
                value: value.to_string(),
            });
        }
    }
    violations.sort_by(|a, b| (a.key, &a.value).cmp(&(b.key, &b.value)));
    LeakageReport { violations }
}

/// Group-disjoint k-fold partition. Validation parts are pairwise disjoint
/// and cover the corpus exactly once; assignment balances note counts by
/// placing larger components first.
pub fn kfold(
    corpus: &Corpus,
    k: usize,
    seed: u64,
    group_keys: &[GroupKey],
) -> Result<Vec<(Corpus, Corpus)>> {
    if k < 2 {
        return Err(Error::config(format!("k must be at least 2, got {k}")));
    }
    validate_group_keys(corpus, group_keys)?;
    let mut components = group_components(corpus, group_keys);
    if components.len() < k {
        return Err(Error::infeasible(format!(
            "{} distinct groups cannot fill {k} folds",
            components.len()
        )));
    }

    let mut rng = rng::seeded(seed);
    rng::shuffle(&mut components, &mut rng);
    // Largest-first greedy for balanced fold sizes; stable for fixed seed.
    components.sort_by_key(|c| std::cmp::Reverse(c.len()));

    let mut fold_of = vec![0usize; corpus.len()];
    let mut fold_sizes = vec![0usize; k];
    for component in &components {
        let target = fold_sizes
            .iter()
            .enumerate()
            .min_by_key(|&(i, s)| (*s, i))
            .map(|(i, _)| i)
            .unwrap_or(0);
        for &i in component {
            fold_of[i] = target;
        }
        fold_sizes[target] += component.len();
    }

    Ok((0..k)
        .map(|fold| {
            let train = corpus.subset(
                |i| fold_of[i] != fold,
                format!("{}#fold{}-train", corpus.provenance, fold),
            );
            let validation = corpus.subset(
                |i| fold_of[i] == fold,
                format!("{}#fold{}-val", corpus.provenance, fold),
            );
            (train, validation)
        })
        .collect())
}
