//! Lowercasing and tokenization of raw narrative text.
//!
//! Tokens split on whitespace and punctuation with three exceptions:
//! a dot directly between two digits stays inside the token ("64.8"),
//! an apostrophe ends the current token and is kept on it ("n'étaient"
//! becomes "n'" + "étaient"), and underscores are token-internal. Runs
//! of letters and digits are split at the boundary ("64.8mm" becomes
//! "64.8" + "mm") unless joined by an underscore.

use super::TokenSeq;

#[derive(Copy, Clone, PartialEq)]
enum CharClass {
    Letter,
    Digit,
    Underscore,
    Apostrophe,
    Dot,
    Separator,
}

fn classify(c: char) -> CharClass {
    match c {
        '_' => CharClass::Underscore,
        '\'' => CharClass::Apostrophe,
        '.' => CharClass::Dot,
        c if c.is_ascii_digit() => CharClass::Digit,
        c if c.is_alphabetic() => CharClass::Letter,
        _ => CharClass::Separator,
    }
}

/// Lowercase `text` and split it into tokens.
pub fn normalize_and_tokenize(text: &str) -> TokenSeq {
    // U+2019 is the typographic apostrophe common in French text.
    let lowered: Vec<char> = text
        .chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .flat_map(char::to_lowercase)
        .collect();

    let mut tokens = Vec::new();
    let mut buf = String::new();
    let mut last_class: Option<CharClass> = None;

    let flush = |buf: &mut String, tokens: &mut Vec<String>| {
        if !buf.is_empty() {
            tokens.push(std::mem::take(buf));
        }
    };

    for (i, &c) in lowered.iter().enumerate() {
        let class = classify(c);
        match class {
            CharClass::Separator => {
                flush(&mut buf, &mut tokens);
                last_class = None;
            }
            CharClass::Apostrophe => {
                if !buf.is_empty() {
                    buf.push(c);
                    flush(&mut buf, &mut tokens);
                }
                last_class = None;
            }
            CharClass::Dot => {
                let between_digits = last_class == Some(CharClass::Digit)
                    && lowered
                        .get(i + 1)
                        .is_some_and(|n| classify(*n) == CharClass::Digit);
                if between_digits {
                    buf.push(c);
                    last_class = Some(CharClass::Dot);
                } else {
                    flush(&mut buf, &mut tokens);
                    last_class = None;
                }
            }
            CharClass::Letter | CharClass::Digit => {
                let boundary = matches!(
                    (last_class, class),
                    (Some(CharClass::Letter), CharClass::Digit)
                        | (Some(CharClass::Digit), CharClass::Letter)
                );
                if boundary {
                    flush(&mut buf, &mut tokens);
                }
                buf.push(c);
                last_class = Some(class);
            }
            CharClass::Underscore => {
                buf.push(c);
                last_class = Some(CharClass::Underscore);
            }
        }
    }
    flush(&mut buf, &mut tokens);
    tokens
}
