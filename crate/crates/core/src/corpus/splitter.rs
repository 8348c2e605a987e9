//! Rule-based sentence splitting.
//!
//! A sentence ends at `.`, `!`, or `?` when the terminator is followed by
//! whitespace and the next non-whitespace character could start a sentence
//! (uppercase letter, digit, or opening quote). A fixed abbreviation list
//! suppresses splits after common abbreviated titles and Latinisms.

use super::Sentence;

/// Abbreviations whose trailing period never ends a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "Mr.", "Mrs.", "Dr.", "Prof.", "St.", "etc.", "e.g.", "i.e.", "vs.", "Fig.", "No.",
];

/// True if `chunk` (a whitespace-delimited token ending in `.`) is on the
/// abbreviation list, ignoring any leading punctuation such as `(` or `"`.
pub(crate) fn is_abbreviation(chunk: &str) -> bool {
    let core = chunk.trim_start_matches(|c: char| !(c.is_alphanumeric() || c == '.'));
    ABBREVIATIONS.iter().any(|a| *a == core)
}

fn starts_sentence(c: char) -> bool {
    c.is_uppercase() || c.is_ascii_digit() || matches!(c, '"' | '\'' | '\u{201C}' | '\u{2018}' | '\u{00AB}')
}

/// Splits prose into sentences. Whitespace-only input yields an empty list;
/// text without a recognized terminator comes back as a single sentence.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    for i in 0..chars.len() {
        if !matches!(chars[i], '.' | '!' | '?') {
            continue;
        }
        let mut j = i + 1;
        if j >= chars.len() || !chars[j].is_whitespace() {
            continue;
        }
        while j < chars.len() && chars[j].is_whitespace() {
            j += 1;
        }
        if j >= chars.len() || !starts_sentence(chars[j]) {
            continue;
        }
        if chars[i] == '.' {
            // Walk back to the start of the token holding this period.
            let mut t = i;
            while t > start && !chars[t - 1].is_whitespace() {
                t -= 1;
            }
            let chunk: String = chars[t..=i].iter().collect();
            if is_abbreviation(&chunk) {
                continue;
            }
        }
        push_trimmed(&mut out, &chars[start..=i]);
        start = j;
    }
    if start < chars.len() {
        push_trimmed(&mut out, &chars[start..]);
    }
    out
}

fn push_trimmed(out: &mut Vec<Sentence>, span: &[char]) {
    let text: String = span.iter().collect();
    let text = text.trim();
    if !text.is_empty() {
        out.push(Sentence::prose(text));
    }
}
