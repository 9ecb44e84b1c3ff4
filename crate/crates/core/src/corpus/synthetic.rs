//! Seeded synthetic-corpus generator for desk-scale experiments.
//!
//! Positive notes always carry at least one cardiac signal term, negative
//! notes draw from a respiratory lexicon, and both share a pseudo-French
//! noise vocabulary. Vital-sign phrases inject decimal numerals at a
//! configurable rate, with value ranges conditioned on the label so the
//! numerals themselves carry signal. French negation patterns are injected
//! into a configurable fraction of notes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, Note};
use crate::error::{Error, Result};
use crate::rng::{self, ChaCha8Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_notes: usize,
    pub positive_rate: f64,
    /// Signal terms drawn per class lexicon.
    pub signal_terms_per_class: usize,
    pub noise_vocab_size: usize,
    /// Fraction of notes receiving a vital-sign phrase with a decimal value.
    pub numeric_injection_rate: f64,
    /// Fraction of notes receiving a "ne X pas" construction.
    pub negation_rate: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Fraction of notes that also carry one signal term of the other class.
    pub cross_signal_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_notes: 1000,
            positive_rate: 0.3565,
            signal_terms_per_class: 12,
            noise_vocab_size: 300,
            numeric_injection_rate: 0.6,
            negation_rate: 0.2,
            min_tokens: 50,
            max_tokens: 125,
            cross_signal_rate: 0.04,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        if self.n_notes == 0 {
            return Err(Error::config("n_notes must be positive"));
        }
        if !(self.positive_rate > 0.0 && self.positive_rate < 1.0) {
            return Err(Error::config("positive_rate must lie in (0,1)"));
        }
        if self.min_tokens < 5 {
            return Err(Error::config("min_tokens must be at least 5"));
        }
        if self.min_tokens > self.max_tokens {
            return Err(Error::config("min_tokens exceeds max_tokens"));
        }
        if self.signal_terms_per_class == 0 || self.noise_vocab_size == 0 {
            return Err(Error::config("lexicon sizes must be positive"));
        }
        for (name, rate) in [
            ("numeric_injection_rate", self.numeric_injection_rate),
            ("negation_rate", self.negation_rate),
            ("cross_signal_rate", self.cross_signal_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::config(format!("{name} must lie in [0,1]")));
            }
        }
        Ok(())
    }
}

const CARDIAC_TERMS: [&str; 16] = [
    "milrinone",
    "levosimendan",
    "dobutamine",
    "cardiomyopathie",
    "cardiogenique",
    "defaillance",
    "hypervolemie",
    "myocardite",
    "surcharge",
    "lcos",
    "greffe",
    "aortique",
    "ventricule",
    "civ",
    "cec",
    "dilatee",
];

const RESPIRATORY_TERMS: [&str; 16] = [
    "ivrs",
    "bronchiolite",
    "toux",
    "rhinorrhee",
    "wheezing",
    "salbutamol",
    "pneumonie",
    "asthme",
    "croup",
    "stridor",
    "desaturation",
    "encombrement",
    "crepitants",
    "tirage",
    "ventolin",
    "aerosol",
];

const FILLER_TERMS: [&str; 14] = [
    "patient",
    "patiente",
    "jour",
    "nuit",
    "stable",
    "examen",
    "bilan",
    "controle",
    "dose",
    "soir",
    "matin",
    "admission",
    "evolution",
    "observation",
];

const NEGATED_VERBS: [&str; 5] = ["presente", "montre", "tolere", "recoit", "necessite"];

const SYLLABLES: [&str; 20] = [
    "ba", "co", "da", "dou", "ga", "jo", "ka", "lu", "ma", "ni", "po", "ra", "sa", "ti", "vo",
    "zu", "mer", "lin", "tor", "val",
];

fn class_lexicon(base: &[&str], size: usize) -> Vec<String> {
    (0..size)
        .map(|i| {
            let term = base[i % base.len()];
            if i < base.len() {
                term.to_string()
            } else {
                format!("{term}{}", i / base.len() + 1)
            }
        })
        .collect()
}

fn noise_vocabulary(size: usize, rng: &mut ChaCha8Rng, reserved: &[&str]) -> Vec<String> {
    let mut vocab = Vec::with_capacity(size);
    let mut seen: std::collections::BTreeSet<String> = reserved.iter().map(|s| s.to_string()).collect();
    while vocab.len() < size {
        let n_syllables = rng.gen_range(2..=4);
        let word: String = (0..n_syllables)
            .map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())])
            .collect();
        if seen.insert(word.clone()) {
            vocab.push(word);
        }
    }
    vocab
}

fn decimal(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> String {
    format!("{:.1}", rng.gen_range(lo..hi))
}

/// A vital-sign phrase whose value range depends on the label.
fn vital_phrase(rng: &mut ChaCha8Rng, label: u8) -> Vec<String> {
    let choice = rng.gen_range(0..4u8);
    let mut phrase: Vec<String> = Vec::new();
    match (label, choice) {
        (1, 0) => phrase.extend(["fe".into(), decimal(rng, 28.0, 48.0), "%".into()]),
        (1, 1) => phrase.extend(["fr".into(), decimal(rng, 12.0, 24.0), "%".into()]),
        (1, 2) => phrase.extend([
            "pro".into(),
            "bnp".into(),
            decimal(rng, 1100.0, 4900.0),
            "ng/l".into(),
        ]),
        (1, _) => phrase.extend(["fc".into(), decimal(rng, 145.0, 190.0), "bpm".into()]),
        (_, 0) => phrase.extend(["fe".into(), decimal(rng, 55.0, 72.0), "%".into()]),
        (_, 1) => phrase.extend(["sat".into(), decimal(rng, 88.0, 99.0), "%".into()]),
        (_, 2) => phrase.extend([
            "pro".into(),
            "bnp".into(),
            decimal(rng, 40.0, 350.0),
            "ng/l".into(),
        ]),
        (_, _) => phrase.extend(["fc".into(), decimal(rng, 90.0, 140.0), "bpm".into()]),
    }
    phrase
}

fn negation_phrase(rng: &mut ChaCha8Rng) -> Vec<String> {
    let verb = NEGATED_VERBS[rng.gen_range(0..NEGATED_VERBS.len())];
    if rng.gen_bool(0.3) {
        vec!["n'etait".to_string(), "pas".to_string()]
    } else {
        vec!["ne".to_string(), verb.to_string(), "pas".to_string()]
    }
}

/// Generate a labeled corpus. Identical configs yield byte-identical output.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Corpus> {
    config.validate()?;
    let mut rng = rng::seeded(config.seed);

    let reserved: Vec<&str> = CARDIAC_TERMS
        .iter()
        .chain(RESPIRATORY_TERMS.iter())
        .chain(FILLER_TERMS.iter())
        .copied()
        .collect();
    let noise = noise_vocabulary(config.noise_vocab_size, &mut rng, &reserved);
    let cardiac = class_lexicon(&CARDIAC_TERMS, config.signal_terms_per_class);
    let respiratory = class_lexicon(&RESPIRATORY_TERMS, config.signal_terms_per_class);

    let n = config.n_notes;
    let n_positive = (n as f64 * config.positive_rate).floor() as usize;
    let mut labels: Vec<u8> = (0..n).map(|i| (i < n_positive) as u8).collect();
    rng::shuffle(&mut labels, &mut rng);

    // Providers are nested within patient groups (one care team per
    // patient), so identifier components stay small enough for group-wise
    // splits and folds to be feasible.
    let patient_pool = (n / 2).max(2);
    let provider_pool = (n / 10).max(6);

    let mut notes = Vec::with_capacity(n);
    for (i, &label) in labels.iter().enumerate() {
        let own = if label == 1 { &cardiac } else { &respiratory };
        let other = if label == 1 { &respiratory } else { &cardiac };
        let length = rng.gen_range(config.min_tokens..=config.max_tokens);

        // Multi-token phrases stay contiguous; everything else is shuffled.
        let mut units: Vec<Vec<String>> = Vec::new();
        let n_signal = rng.gen_range(2..=4usize);
        for _ in 0..n_signal {
            units.push(vec![own[rng.gen_range(0..own.len())].clone()]);
        }
        if rng.gen_bool(config.cross_signal_rate) {
            units.push(vec![other[rng.gen_range(0..other.len())].clone()]);
        }
        if rng.gen_bool(config.numeric_injection_rate) {
            units.push(vital_phrase(&mut rng, label));
        }
        if rng.gen_bool(config.negation_rate) {
            units.push(negation_phrase(&mut rng));
        }

        let used: usize = units.iter().map(Vec::len).sum();
        for _ in used..length {
            let token = if rng.gen_bool(0.25) {
                FILLER_TERMS[rng.gen_range(0..FILLER_TERMS.len())].to_string()
            } else {
                noise[rng.gen_range(0..noise.len())].clone()
            };
            units.push(vec![token]);
        }
        rng::shuffle(&mut units, &mut rng);

        // Sentence breaks go between units so multi-token phrases stay whole.
        let mut text = String::new();
        let mut sentence_len = 0usize;
        let mut sentence_break = rng.gen_range(8..=15);
        for (u_idx, unit) in units.iter().enumerate() {
            if u_idx > 0 {
                if sentence_len >= sentence_break {
                    text.push_str(". ");
                    sentence_len = 0;
                    sentence_break = rng.gen_range(8..=15);
                } else {
                    text.push(' ');
                }
            }
            text.push_str(&unit.join(" "));
            sentence_len += unit.len();
        }
        text.push('.');

        let patient = rng.gen_range(0..patient_pool);
        notes.push(Note {
            note_id: format!("n{:05}", i + 1),
            patient_id: format!("p{:04}", patient),
            care_provider_id: format!("c{:03}", patient % provider_pool),
            text,
            label,
        });
    }

    Corpus::from_notes(notes, format!("synthetic(seed={})", config.seed))
}
