//! Token-to-vector mapping: a text-format vector loader, a rule-based
//! tokenizer, and total lookup with a configurable out-of-vocabulary policy.
//!
//! The vector file format is the plain-text word2vec layout: a `<count> <dim>`
//! header line, then one `<token> <v1> … <vdim>` line per entry. Embeddings
//! are frozen — nothing here is trained.

use crate::corpus::Sentence;
use crate::corpus::ABBREVIATIONS;
use std::collections::HashMap;
use std::io::{BufRead, Write};
use thiserror::Error;

/// What unknown tokens map to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// The all-zeros vector: neutral under max-pooling of tanh-bounded
    /// activations.
    #[default]
    Zeros,
    /// The componentwise mean of all loaded vectors.
    MeanVector,
}

impl std::str::FromStr for OovPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zeros" => Ok(OovPolicy::Zeros),
            "mean" => Ok(OovPolicy::MeanVector),
            other => Err(format!("unknown OOV policy {other:?} (use zeros|mean)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: unparsable or non-finite value for token {token:?}")]
    NonFiniteValue { line: usize, token: String },
    #[error("duplicate token {token:?}")]
    DuplicateToken { token: String },
    #[error("header declares {expected} entries but file has {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// An immutable token → vector table with total lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
    unk: Vec<f64>,
}

impl EmbeddingTable {
    /// Builds a table from `(token, vector)` pairs, validating dimensions,
    /// finiteness, and uniqueness.
    pub fn build(
        dim: usize,
        entries: Vec<(String, Vec<f64>)>,
        policy: OovPolicy,
    ) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::BadHeader("dimension must be positive".into()));
        }
        let mut tokens = Vec::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (line, (token, vector)) in entries.into_iter().enumerate() {
            if vector.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    line: line + 2,
                    expected: dim,
                    found: vector.len(),
                });
            }
            if !vector.iter().all(|v| v.is_finite()) {
                return Err(EmbeddingError::NonFiniteValue {
                    line: line + 2,
                    token,
                });
            }
            if index.contains_key(&token) {
                return Err(EmbeddingError::DuplicateToken { token });
            }
            index.insert(token.clone(), vectors.len());
            tokens.push(token);
            vectors.push(vector);
        }
        let unk = match policy {
            OovPolicy::Zeros => vec![0.0; dim],
            OovPolicy::MeanVector => {
                let mut mean = vec![0.0; dim];
                for v in &vectors {
                    for (m, x) in mean.iter_mut().zip(v) {
                        *m += x;
                    }
                }
                if !vectors.is_empty() {
                    let n = vectors.len() as f64;
                    for m in &mut mean {
                        *m /= n;
                    }
                }
                mean
            }
        };
        Ok(EmbeddingTable {
            dim,
            tokens,
            vectors,
            index,
            unk,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn unk(&self) -> &[f64] {
        &self.unk
    }

    /// Total lookup: exact token, then lowercased token, then unk.
    pub fn lookup(&self, token: &str) -> &[f64] {
        if let Some(&i) = self.index.get(token) {
            return &self.vectors[i];
        }
        let lower = token.to_lowercase();
        if lower != token {
            if let Some(&i) = self.index.get(&lower) {
                return &self.vectors[i];
            }
        }
        &self.unk
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Entries in insertion order, for serialization.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tokens
            .iter()
            .map(String::as_str)
            .zip(self.vectors.iter().map(Vec::as_slice))
    }
}

/// Parses the text vector format.
pub fn load_vectors<R: BufRead>(reader: R, policy: OovPolicy) -> Result<EmbeddingTable, EmbeddingError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| EmbeddingError::BadHeader("empty input".into()))??;
    let mut parts = header.split_whitespace();
    let count: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| EmbeddingError::BadHeader(format!("unparsable count in {header:?}")))?;
    let dim: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| EmbeddingError::BadHeader(format!("unparsable dimension in {header:?}")))?;
    if parts.next().is_some() {
        return Err(EmbeddingError::BadHeader(format!(
            "trailing content in header {header:?}"
        )));
    }
    if dim == 0 {
        return Err(EmbeddingError::BadHeader("dimension must be positive".into()));
    }
    let mut entries = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line has a first field").to_string();
        let mut vector = Vec::with_capacity(dim);
        let mut bad_value = false;
        for field in fields {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => vector.push(v),
                _ => {
                    bad_value = true;
                    vector.push(0.0);
                }
            }
        }
        if vector.len() != dim {
            return Err(EmbeddingError::DimensionMismatch {
                line: lineno,
                expected: dim,
                found: vector.len(),
            });
        }
        if bad_value {
            return Err(EmbeddingError::NonFiniteValue { line: lineno, token });
        }
        entries.push((token, vector));
    }
    if entries.len() != count {
        return Err(EmbeddingError::CountMismatch {
            expected: count,
            found: entries.len(),
        });
    }
    EmbeddingTable::build(dim, entries, policy)
}

/// Writes the table back in the same text format. `f64` values print in
/// shortest round-trip form, so load → save → load is lossless.
pub fn save_vectors<W: Write>(mut w: W, table: &EmbeddingTable) -> std::io::Result<()> {
    writeln!(w, "{} {}", table.len(), table.dim())?;
    for (token, vector) in table.entries() {
        write!(w, "{token}")?;
        for v in vector {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Splits sentence text into tokens: whitespace first, then leading/trailing
/// punctuation peeled into separate tokens. Case is preserved; a trailing
/// period stays attached when the token is a known abbreviation.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        chunk_tokens(chunk, &mut out);
    }
    out
}

/// Tokens of one sentence, via [`tokenize`] on its text.
pub fn sentence_tokens(sentence: &Sentence) -> Vec<String> {
    tokenize(&sentence.text)
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{201C}' | '\u{201D}' | '\u{2018}' | '\u{2019}' | '\u{00AB}' | '\u{00BB}'
                | '\u{2026}' | '\u{2013}' | '\u{2014}'
        )
}

fn chunk_tokens(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut a = 0usize;
    let mut b = chars.len();
    while a < b && is_punct(chars[a]) {
        a += 1;
    }
    let lead_end = a;
    while b > a && is_punct(chars[b - 1]) {
        if chars[b - 1] == '.' {
            let cand: String = chars[a..b].iter().collect();
            if ABBREVIATIONS.iter().any(|abbr| *abbr == cand) {
                break;
            }
        }
        b -= 1;
    }
    for &c in &chars[..lead_end] {
        out.push(c.to_string());
    }
    if a < b {
        out.push(chars[a..b].iter().collect());
    }
    for &c in &chars[b..] {
        out.push(c.to_string());
    }
}

/// One vector per token; an empty token list becomes the single-vector
/// sequence `[unk]` so downstream sequence ops always see T ≥ 1.
pub fn embed_sentence(tokens: &[String], table: &EmbeddingTable) -> Vec<Vec<f64>> {
    if tokens.is_empty() {
        return vec![table.unk().to_vec()];
    }
    tokens.iter().map(|t| table.lookup(t).to_vec()).collect()
}

/// A table assigning each group of tokens the same one-hot vector: group `g`
/// gets basis vector `g % dim`. Used for synthetic corpora where topics, not
/// word identities, carry the signal.
pub fn one_hot_table(dim: usize, groups: &[Vec<String>]) -> Result<EmbeddingTable, EmbeddingError> {
    let mut entries = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        let mut v = vec![0.0; dim];
        v[g % dim] = 1.0;
        for token in group {
            entries.push((token.clone(), v.clone()));
        }
    }
    EmbeddingTable::build(dim, entries, OovPolicy::Zeros)
}
