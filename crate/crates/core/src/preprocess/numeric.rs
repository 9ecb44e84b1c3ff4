//! Numeric-value decoding strategies for vital signs embedded in narratives.
//!
//! Four strategies: keep numerals untouched, remove them together with a
//! trailing unit, spell the decimal point out as the token "dot", or
//! decompose every digit into a positional `digit_place` token. The last
//! two are lossless; inverse decoders rebuild the original numeral string.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::TokenSeq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NumericStrategy {
    Keep,
    Remove,
    #[default]
    DotEncode,
    DigitDecompose,
}

/// Positional place names; index 0 is the ones place, positive indices move
/// left of the decimal point, negative to the right.
const INTEGER_PLACES: [&str; 4] = ["ones", "tens", "hundreds", "thousands"];
const FRACTION_PLACES: [&str; 3] = ["tenths", "hundredths", "thousandths"];

pub const MAX_INTEGER_DIGITS: usize = 4;
pub const MAX_FRACTION_DIGITS: usize = 3;

/// A numeric token: ASCII digits with at most one interior decimal point.
pub fn is_numeric_token(token: &str) -> bool {
    let mut parts = token.split('.');
    let int_part = parts.next().unwrap_or("");
    let frac_part = parts.next();
    if parts.next().is_some() {
        return false;
    }
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    all_digits(int_part) && frac_part.map_or(true, all_digits)
}

fn split_numeral(token: &str) -> (&str, Option<&str>) {
    match token.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (token, None),
    }
}

fn dot_encode_into(token: &str, out: &mut TokenSeq) {
    let (int_part, frac_part) = split_numeral(token);
    match frac_part {
        Some(frac) => {
            out.push(int_part.to_string());
            out.push("dot".to_string());
            out.push(frac.to_string());
        }
        None => out.push(token.to_string()),
    }
}

fn digit_decompose_into(token: &str, out: &mut TokenSeq) {
    let (int_part, frac_part) = split_numeral(token);
    let frac = frac_part.unwrap_or("");
    if int_part.len() > MAX_INTEGER_DIGITS || frac.len() > MAX_FRACTION_DIGITS {
        log::warn!("numeral {token} exceeds place limits; falling back to dot encoding");
        dot_encode_into(token, out);
        return;
    }
    for (i, d) in int_part.bytes().enumerate() {
        let place = INTEGER_PLACES[int_part.len() - 1 - i];
        out.push(format!("{}_{place}", d as char));
    }
    for (i, d) in frac.bytes().enumerate() {
        out.push(format!("{}_{}", d as char, FRACTION_PLACES[i]));
    }
}

/// Apply the configured strategy to every numeric token.
pub fn decode_numerics(
    tokens: &[String],
    strategy: NumericStrategy,
    unit_lexicon: &BTreeSet<String>,
) -> TokenSeq {
    match strategy {
        NumericStrategy::Keep => tokens.to_vec(),
        NumericStrategy::Remove => {
            let mut out = Vec::with_capacity(tokens.len());
            let mut i = 0;
            while i < tokens.len() {
                if is_numeric_token(&tokens[i]) {
                    i += 1;
                    // A unit right after the value goes with it.
                    if i < tokens.len() && unit_lexicon.contains(&tokens[i]) {
                        i += 1;
                    }
                } else {
                    out.push(tokens[i].clone());
                    i += 1;
                }
            }
            out
        }
        NumericStrategy::DotEncode => {
            let mut out = Vec::with_capacity(tokens.len());
            for t in tokens {
                if is_numeric_token(t) {
                    dot_encode_into(t, &mut out);
                } else {
                    out.push(t.clone());
                }
            }
            out
        }
        NumericStrategy::DigitDecompose => {
            let mut out = Vec::with_capacity(tokens.len());
            for t in tokens {
                if is_numeric_token(t) {
                    digit_decompose_into(t, &mut out);
                } else {
                    out.push(t.clone());
                }
            }
            out
        }
    }
}

fn parse_place(token: &str) -> Option<(char, i32)> {
    let (digit, place) = token.split_once('_')?;
    let mut chars = digit.chars();
    let d = chars.next()?;
    if chars.next().is_some() || !d.is_ascii_digit() {
        return None;
    }
    if let Some(i) = INTEGER_PLACES.iter().position(|p| *p == place) {
        return Some((d, i as i32));
    }
    if let Some(i) = FRACTION_PLACES.iter().position(|p| *p == place) {
        return Some((d, -(i as i32) - 1));
    }
    None
}

/// Inverse of the dot strategy: every `<digits> dot <digits>` triple is
/// rejoined into one decimal token.
pub fn undo_dot_encode(tokens: &[String]) -> TokenSeq {
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if i + 2 < tokens.len()
            && tokens[i + 1] == "dot"
            && all_digits(&tokens[i])
            && all_digits(&tokens[i + 2])
        {
            out.push(format!("{}.{}", tokens[i], tokens[i + 2]));
            i += 3;
        } else {
            out.push(tokens[i].clone());
            i += 1;
        }
    }
    out
}

/// Inverse of the digit strategy: maximal runs of place tokens whose places
/// step down one by one through the ones place are rebuilt into numerals.
/// Runs that do not form a complete numeral are left untouched.
pub fn undo_digit_decompose(tokens: &[String]) -> TokenSeq {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let mut run = Vec::new();
        let mut j = i;
        while j < tokens.len() {
            match parse_place(&tokens[j]) {
                Some((d, rank)) => {
                    let expected = run.last().map(|&(_, r): &(char, i32)| r - 1);
                    if expected.is_some_and(|e| e != rank) {
                        break;
                    }
                    run.push((d, rank));
                    j += 1;
                }
                None => break,
            }
        }
        let contains_ones = run.iter().any(|&(_, r)| r == 0);
        let ends_run = run.last().is_some_and(|&(_, r)| r <= 0);
        if run.len() >= 1 && contains_ones && ends_run {
            let mut numeral = String::new();
            for &(d, rank) in &run {
                if rank == -1 {
                    numeral.push('.');
                }
                numeral.push(d);
            }
            out.push(numeral);
            i = j;
        } else {
            out.push(tokens[i].clone());
            i += 1;
        }
    }
    out
}
