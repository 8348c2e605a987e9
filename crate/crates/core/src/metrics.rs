//! Pk evaluation: the window-size convention, sentence- and word-window
//! variants of the metric, a seeded random baseline, and corpus-level
//! reports.
//!
//! Pk slides a window of size `k` across the document and asks, for each
//! placement, whether the two window ends fall in the same segment; the
//! score is the fraction of placements where reference and hypothesis
//! disagree on that question. `k` is half the reference's average segment
//! size, rounded half up and floored at 1, computed per document.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledDocument;
use crate::infer::Hypothesis;

#[derive(Debug, Error)]
pub enum MetricsError {
    /// The window must be strictly smaller than the number of positions.
    #[error("window size {k} does not fit: it must be smaller than {n}")]
    WindowTooLarge { k: usize, n: usize },
    /// Reference and hypothesis describe different numbers of sentences.
    #[error("hypothesis describes {found} boundary positions but the reference has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("cannot evaluate an empty corpus")]
    EmptyCorpus,
    /// Every document was skipped (window too large), so no mean exists.
    #[error("no document was scorable; all {skipped} were skipped")]
    NothingScored { skipped: usize },
}

/// Which positions the Pk window slides over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PkVariant {
    Sentences,
    Words,
}

impl fmt::Display for PkVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PkVariant::Sentences => "sentences",
            PkVariant::Words => "words",
        })
    }
}

impl FromStr for PkVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sentences" => Ok(PkVariant::Sentences),
            "words" => Ok(PkVariant::Words),
            other => Err(format!("unknown Pk variant {other:?} (expected \"sentences\" or \"words\")")),
        }
    }
}

/// Window size: half the mean segment size, rounded half up, never below 1.
pub fn window_size(ref_sizes: &[usize]) -> usize {
    assert!(!ref_sizes.is_empty(), "window_size needs at least one segment");
    let mean = ref_sizes.iter().sum::<usize>() as f64 / ref_sizes.len() as f64;
    let k = (mean / 2.0 + 0.5).floor() as usize;
    k.max(1)
}

/// Reference segment sizes measured in words instead of sentences: each
/// sentence contributes its token count to the segment it belongs to.
pub fn word_segment_sizes(doc: &LabeledDocument) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(doc.segment_sizes.len());
    let mut iter = doc.sentences.iter();
    for &seg in &doc.segment_sizes {
        sizes.push(iter.by_ref().take(seg).map(|s| s.tokens.len()).sum());
    }
    sizes
}

/// Maps a boundary vector of length n−1 to per-position segment ids of
/// length n: the id increments after every boundary.
fn segment_ids(boundaries: &[u8]) -> Vec<usize> {
    let mut ids = Vec::with_capacity(boundaries.len() + 1);
    let mut id = 0usize;
    ids.push(id);
    for &b in boundaries {
        if b == 1 {
            id += 1;
        }
        ids.push(id);
    }
    ids
}

/// Shared Pk core over precomputed segment-id sequences.
fn pk_from_ids(ref_ids: &[usize], hyp_ids: &[usize], k: usize) -> Result<f64, MetricsError> {
    debug_assert_eq!(ref_ids.len(), hyp_ids.len());
    debug_assert!(k >= 1, "window size must be positive");
    let n = ref_ids.len();
    if k >= n {
        return Err(MetricsError::WindowTooLarge { k, n });
    }
    let windows = n - k;
    let disagreements = (0..windows)
        .filter(|&i| (ref_ids[i] == ref_ids[i + k]) != (hyp_ids[i] == hyp_ids[i + k]))
        .count();
    Ok(disagreements as f64 / windows as f64)
}

/// Sentence-window Pk between a reference boundary vector and a hypothesis.
pub fn pk_sentences(reference: &[u8], hyp: &Hypothesis, k: usize) -> Result<f64, MetricsError> {
    if hyp.boundaries.len() != reference.len() {
        return Err(MetricsError::LengthMismatch {
            expected: reference.len(),
            found: hyp.boundaries.len(),
        });
    }
    pk_from_ids(&segment_ids(reference), &segment_ids(&hyp.boundaries), k)
}

/// Word-window Pk: every word inherits its sentence's segment id and the
/// window slides over word positions. `k_words` normally comes from
/// [`window_size`] over [`word_segment_sizes`].
pub fn pk_words(
    reference: &[u8],
    hyp: &Hypothesis,
    doc: &LabeledDocument,
    k_words: usize,
) -> Result<f64, MetricsError> {
    if hyp.boundaries.len() != reference.len() {
        return Err(MetricsError::LengthMismatch {
            expected: reference.len(),
            found: hyp.boundaries.len(),
        });
    }
    debug_assert_eq!(reference.len() + 1, doc.n());
    let expand = |ids: Vec<usize>| -> Vec<usize> {
        doc.sentences
            .iter()
            .zip(&ids)
            .flat_map(|(s, &id)| std::iter::repeat(id).take(s.tokens.len()))
            .collect()
    };
    let ref_word_ids = expand(segment_ids(reference));
    let hyp_word_ids = expand(segment_ids(&hyp.boundaries));
    pk_from_ids(&ref_word_ids, &hyp_word_ids, k_words)
}

/// Boundary after each sentence independently with probability `1/k_avg`,
/// from a fresh generator seeded with `seed`.
pub fn random_baseline(n: usize, k_avg: f64, seed: u64) -> Hypothesis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_baseline_with(&mut rng, n, k_avg)
}

/// Same as [`random_baseline`] but drawing from a caller-owned generator, so
/// a corpus-wide sweep can consume one seeded stream.
pub fn random_baseline_with(rng: &mut impl Rng, n: usize, k_avg: f64) -> Hypothesis {
    debug_assert!(n >= 1);
    debug_assert!(k_avg >= 1.0);
    let p = 1.0 / k_avg;
    Hypothesis {
        boundaries: (0..n.saturating_sub(1))
            .map(|_| u8::from(rng.gen_bool(p)))
            .collect(),
    }
}

/// One scored document in an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEval {
    pub id: String,
    pub k: usize,
    pub pk: f64,
    /// Wall-clock spent segmenting and scoring this document.
    pub seconds: f64,
}

/// A document excluded from the aggregate because its window does not fit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedDoc {
    pub id: String,
    pub k: usize,
    pub positions: usize,
}

/// Corpus-level evaluation: per-document scores plus their unweighted mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: PkVariant,
    /// Threshold the segmenter used, when it thresholds at all.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub aggregate_pk: f64,
    pub docs: Vec<DocEval>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkippedDoc>,
}

/// Runs `segmenter` over every document and aggregates Pk. Documents whose
/// window does not fit are skipped and listed; a hypothesis of the wrong
/// length is a hard error.
pub fn evaluate_corpus(
    mut segmenter: impl FnMut(&LabeledDocument) -> Hypothesis,
    corpus: &[LabeledDocument],
    variant: PkVariant,
    tau: Option<f64>,
) -> Result<EvalReport, MetricsError> {
    if corpus.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut docs = Vec::new();
    let mut skipped = Vec::new();
    for doc in corpus {
        let start = Instant::now();
        let hyp = segmenter(doc);
        let (k, positions) = match variant {
            PkVariant::Sentences => (window_size(&doc.segment_sizes), doc.n()),
            PkVariant::Words => {
                let word_sizes = word_segment_sizes(doc);
                let total: usize = word_sizes.iter().sum();
                (window_size(&word_sizes), total)
            }
        };
        let pk = match variant {
            PkVariant::Sentences => pk_sentences(&doc.labels, &hyp, k),
            PkVariant::Words => pk_words(&doc.labels, &hyp, doc, k),
        };
        match pk {
            Ok(pk) => docs.push(DocEval {
                id: doc.id.clone(),
                k,
                pk,
                seconds: start.elapsed().as_secs_f64(),
            }),
            Err(MetricsError::WindowTooLarge { .. }) => skipped.push(SkippedDoc {
                id: doc.id.clone(),
                k,
                positions,
            }),
            Err(other) => return Err(other),
        }
    }
    if docs.is_empty() {
        return Err(MetricsError::NothingScored {
            skipped: skipped.len(),
        });
    }
    let aggregate_pk = docs.iter().map(|d| d.pk).sum::<f64>() / docs.len() as f64;
    Ok(EvalReport {
        variant,
        tau,
        aggregate_pk,
        docs,
        skipped,
    })
}
