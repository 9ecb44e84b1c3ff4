//! French negation prefixing.
//!
//! The pattern `(ne | n') X ... pas` rewrites to `neg_X`: the trigger and
//! the closing "pas" are dropped, the negated term gains the `neg_` prefix
//! and any tokens between it and "pas" pass through unprefixed. At most
//! `window` tokens may sit between the trigger and "pas". Triggers without
//! a closing "pas" in range are left untouched.

use super::TokenSeq;

/// Default number of tokens allowed between the trigger and "pas".
pub const DEFAULT_NEGATION_WINDOW: usize = 3;

pub const NEGATION_PREFIX: &str = "neg_";

fn is_trigger(token: &str) -> bool {
    token == "ne" || token == "n'"
}

/// Rewrite negation patterns with the default window.
pub fn apply_negation(tokens: &[String]) -> TokenSeq {
    apply_negation_with_window(tokens, DEFAULT_NEGATION_WINDOW)
}

/// Rewrite negation patterns allowing up to `window` tokens between the
/// trigger and "pas".
pub fn apply_negation_with_window(tokens: &[String], window: usize) -> TokenSeq {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if is_trigger(&tokens[i]) && i + 1 < tokens.len() {
            // X sits right after the trigger; "pas" must close within range.
            let last = (i + 1 + window).min(tokens.len().saturating_sub(1));
            let closing = (i + 2..=last).find(|&j| tokens[j] == "pas");
            if let Some(j) = closing {
                out.push(format!("{NEGATION_PREFIX}{}", tokens[i + 1]));
                out.extend_from_slice(&tokens[i + 2..j]);
                i = j + 1;
                continue;
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    out
}
