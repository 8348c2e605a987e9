//! Corpus construction: parsing section-annotated documents, filtering noisy
//! segments, flattening to labeled sentence sequences, and generating
//! synthetic concatenation-style corpora for controlled experiments.

mod format;
mod splitter;
mod synth;
mod transform;

pub use format::{
    parse_document, read_labeled_record, read_manifest, serialize_document, write_labeled_record,
    write_manifest, LabeledRecord, CODE_PREFIX, LIST_PREFIX, SEPARATOR_PREFIX,
};
pub use splitter::{split_sentences, ABBREVIATIONS};
pub use synth::{generate_choi_style, synthetic_pool, PassageSource, SyntheticPool};
pub use transform::{
    apply_filters, drop_first_segment, omit_list_code, prepare_training_doc, to_labeled,
};

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

/// How a sentence entered the document: ordinary prose, a list item, or a
/// code line. List items and code lines are kept through corpus construction
/// but removed from training inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceKind {
    Prose,
    ListItem,
    Code,
}

/// A single sentence with its raw text, whitespace-split surface tokens, and
/// provenance kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<String>,
    pub kind: SentenceKind,
}

impl Sentence {
    /// Builds a sentence from trimmed text. Tokens are the whitespace-split
    /// words of the text; finer punctuation handling happens at embedding
    /// lookup time.
    pub fn new(text: impl Into<String>, kind: SentenceKind) -> Self {
        let text = text.into().trim().to_string();
        debug_assert!(!text.is_empty(), "sentence text must be non-empty");
        let tokens = text.split_whitespace().map(str::to_string).collect();
        Sentence { text, tokens, kind }
    }

    pub fn prose(text: impl Into<String>) -> Self {
        Sentence::new(text, SentenceKind::Prose)
    }
}

/// A section of a document: heading level (1 = top level), title, the
/// sentences that appear directly under the heading, and nested subsections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub level: u32,
    pub title: String,
    pub sentences: Vec<Sentence>,
    pub children: Vec<Segment>,
}

impl Segment {
    /// Number of sentences in this segment and all nested subsegments.
    pub fn subtree_sentence_count(&self) -> usize {
        self.sentences.len()
            + self
                .children
                .iter()
                .map(Segment::subtree_sentence_count)
                .sum::<usize>()
    }

    /// Number of segments in this subtree, counting the segment itself.
    pub fn subtree_segment_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(Segment::subtree_segment_count)
            .sum::<usize>()
    }

    /// Appends the subtree's sentences in reading order (own sentences first,
    /// then each child's, depth first).
    pub fn flatten_into(&self, out: &mut Vec<Sentence>) {
        out.extend(self.sentences.iter().cloned());
        for child in &self.children {
            child.flatten_into(out);
        }
    }
}

/// A parsed document: an ordered tree of segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub segments: Vec<Segment>,
}

impl Document {
    /// Total segment count across all nesting levels.
    pub fn segment_count_all_levels(&self) -> usize {
        self.segments
            .iter()
            .map(Segment::subtree_segment_count)
            .sum()
    }
}

/// A document flattened for the model: sentences in order, plus a binary
/// boundary vector. `labels[i] == 1` means sentence `i` is the last sentence
/// of a top-level segment; the vector has length `n - 1` because the final
/// sentence always ends a segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub labels: Vec<u8>,
    pub segment_sizes: Vec<usize>,
}

impl LabeledDocument {
    /// Builds a labeled document from per-segment sentence counts. Sizes must
    /// be positive and sum to the sentence count.
    pub fn from_segment_sizes(
        id: impl Into<String>,
        sentences: Vec<Sentence>,
        segment_sizes: Vec<usize>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        if sentences.is_empty() || segment_sizes.is_empty() {
            return Err(CorpusError::InvalidLabeled {
                id,
                reason: "document has no sentences".into(),
            });
        }
        if segment_sizes.iter().any(|&s| s == 0) {
            return Err(CorpusError::InvalidLabeled {
                id,
                reason: "segment sizes must be positive".into(),
            });
        }
        let total: usize = segment_sizes.iter().sum();
        if total != sentences.len() {
            return Err(CorpusError::InvalidLabeled {
                id,
                reason: format!(
                    "segment sizes sum to {total} but document has {} sentences",
                    sentences.len()
                ),
            });
        }
        let mut labels = vec![0u8; sentences.len() - 1];
        let mut end = 0usize;
        for &size in &segment_sizes {
            end += size;
            if end < sentences.len() {
                labels[end - 1] = 1;
            }
        }
        Ok(LabeledDocument {
            id,
            sentences,
            labels,
            segment_sizes,
        })
    }

    /// Builds a labeled document from an explicit boundary vector of length
    /// `n - 1` with entries in `{0, 1}`.
    pub fn from_labels(
        id: impl Into<String>,
        sentences: Vec<Sentence>,
        labels: Vec<u8>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        if sentences.is_empty() {
            return Err(CorpusError::InvalidLabeled {
                id,
                reason: "document has no sentences".into(),
            });
        }
        if labels.len() + 1 != sentences.len() {
            return Err(CorpusError::InvalidLabeled {
                id,
                reason: format!(
                    "label vector has length {} but document has {} sentences",
                    labels.len(),
                    sentences.len()
                ),
            });
        }
        if labels.iter().any(|&b| b > 1) {
            return Err(CorpusError::InvalidLabeled {
                id,
                reason: "labels must be 0 or 1".into(),
            });
        }
        let mut segment_sizes = Vec::new();
        let mut current = 0usize;
        for (i, _) in sentences.iter().enumerate() {
            current += 1;
            let is_boundary = i + 1 == sentences.len() || labels[i] == 1;
            if is_boundary {
                segment_sizes.push(current);
                current = 0;
            }
        }
        Ok(LabeledDocument {
            id,
            sentences,
            labels,
            segment_sizes,
        })
    }

    /// Number of sentences.
    pub fn n(&self) -> usize {
        self.sentences.len()
    }
}

/// Why a document was dropped during corpus construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rejection {
    /// More than half of the document's segments were filtered out.
    MostSegmentsFiltered { removed: usize, original: usize },
    /// Fewer than three top-level segments survived filtering.
    TooFewSegments { kept: usize },
    /// After dropping the lead segment and non-prose sentences, fewer than
    /// two segments remain to train on.
    TooFewTrainingSegments { kept: usize },
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::MostSegmentsFiltered { removed, original } => {
                write!(f, "{removed} of {original} segments filtered out")
            }
            Rejection::TooFewSegments { kept } => {
                write!(f, "only {kept} top-level segments left after filtering")
            }
            Rejection::TooFewTrainingSegments { kept } => {
                write!(f, "only {kept} segments left after training transforms")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}:{line}: malformed separator: {reason}")]
    MalformedSeparator {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: segment level jumps to {level} with no level-{} parent open", level - 1)]
    LevelJump {
        path: String,
        line: usize,
        level: u32,
    },
    #[error("document {id} is invalid: {reason}")]
    InvalidLabeled { id: String, reason: String },
    #[error("passage pool has {available} usable sources but {needed} are needed per document")]
    InsufficientPool { needed: usize, available: usize },
    #[error("segment length range [{lo}, {hi}] is invalid (need 1 <= lo <= hi)")]
    InvalidSegLenRange { lo: usize, hi: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{path}: bad record: {reason}")]
    BadRecord { path: String, reason: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Summary statistics over a corpus of labeled documents. Standard deviations
/// are population standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub segment_count: usize,
    pub sentence_count: usize,
    pub seg_len_mean: f64,
    pub seg_len_std: f64,
    pub segs_per_doc_mean: f64,
    pub segs_per_doc_std: f64,
}

/// Computes corpus statistics: mean/std of top-level segment length in
/// sentences (pooled over all segments) and of segments per document.
pub fn corpus_stats(corpus: &[LabeledDocument]) -> Result<CorpusStats, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let seg_lens: Vec<f64> = corpus
        .iter()
        .flat_map(|d| d.segment_sizes.iter().map(|&s| s as f64))
        .collect();
    let per_doc: Vec<f64> = corpus.iter().map(|d| d.segment_sizes.len() as f64).collect();
    let (seg_len_mean, seg_len_std) = mean_std(&seg_lens);
    let (segs_per_doc_mean, segs_per_doc_std) = mean_std(&per_doc);
    Ok(CorpusStats {
        doc_count: corpus.len(),
        segment_count: seg_lens.len(),
        sentence_count: corpus.iter().map(LabeledDocument::n).sum(),
        seg_len_mean,
        seg_len_std,
        segs_per_doc_mean,
        segs_per_doc_std,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Reads a split manifest: one path per line, relative to the manifest's
/// directory. Blank lines are ignored.
pub fn manifest_paths(manifest: &str, base: &std::path::Path) -> Vec<PathBuf> {
    manifest
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| base.join(l))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(t: &str) -> Sentence {
        Sentence::prose(t)
    }

    #[test]
    fn labels_from_segment_sizes() {
        let sentences: Vec<Sentence> = (0..8).map(|i| sent(&format!("S{i}."))).collect();
        let doc = LabeledDocument::from_segment_sizes("d", sentences, vec![3, 2, 3]).unwrap();
        assert_eq!(doc.labels, vec![0, 0, 1, 0, 1, 0, 0]);
        assert_eq!(doc.n(), 8);
    }

    #[test]
    fn labels_round_trip_through_sizes() {
        let sentences: Vec<Sentence> = (0..6).map(|i| sent(&format!("S{i}."))).collect();
        let doc = LabeledDocument::from_segment_sizes("d", sentences.clone(), vec![1, 4, 1]).unwrap();
        let back = LabeledDocument::from_labels("d", sentences, doc.labels.clone()).unwrap();
        assert_eq!(back.segment_sizes, vec![1, 4, 1]);
    }

    #[test]
    fn single_segment_doc_has_all_zero_labels() {
        let sentences: Vec<Sentence> = (0..4).map(|i| sent(&format!("S{i}."))).collect();
        let doc = LabeledDocument::from_segment_sizes("d", sentences, vec![4]).unwrap();
        assert_eq!(doc.labels, vec![0, 0, 0]);
    }

    #[test]
    fn size_sum_mismatch_is_rejected() {
        let sentences: Vec<Sentence> = (0..4).map(|i| sent(&format!("S{i}."))).collect();
        let err = LabeledDocument::from_segment_sizes("d", sentences, vec![3, 2]).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidLabeled { .. }));
    }

    #[test]
    fn zero_segment_size_is_rejected() {
        let sentences: Vec<Sentence> = (0..2).map(|i| sent(&format!("S{i}."))).collect();
        assert!(LabeledDocument::from_segment_sizes("d", sentences, vec![2, 0]).is_err());
    }

    #[test]
    fn subtree_counts() {
        let leaf = Segment {
            level: 2,
            title: "leaf".into(),
            sentences: vec![sent("A.")],
            children: vec![],
        };
        let root = Segment {
            level: 1,
            title: "root".into(),
            sentences: vec![sent("B."), sent("C.")],
            children: vec![leaf],
        };
        assert_eq!(root.subtree_sentence_count(), 3);
        assert_eq!(root.subtree_segment_count(), 2);
    }

    #[test]
    fn stats_match_hand_computation() {
        // Segment sizes 2,4 and 3,3,3 -> pooled lengths [2,4,3,3,3],
        // mean 3.0, population std sqrt(2/5). Segments per doc [2,3].
        let mk = |id: &str, sizes: Vec<usize>| {
            let n: usize = sizes.iter().sum();
            let sentences = (0..n).map(|i| sent(&format!("S{i}."))).collect();
            LabeledDocument::from_segment_sizes(id, sentences, sizes).unwrap()
        };
        let corpus = vec![mk("a", vec![2, 4]), mk("b", vec![3, 3, 3])];
        let stats = corpus_stats(&corpus).unwrap();
        assert_eq!(stats.doc_count, 2);
        assert_eq!(stats.segment_count, 5);
        assert_eq!(stats.sentence_count, 15);
        assert!((stats.seg_len_mean - 3.0).abs() < 1e-12);
        assert!((stats.seg_len_std - (0.4f64).sqrt()).abs() < 1e-12);
        assert!((stats.segs_per_doc_mean - 2.5).abs() < 1e-12);
        assert!((stats.segs_per_doc_std - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stats_on_empty_corpus_fail() {
        assert!(matches!(corpus_stats(&[]), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn stats_two_point_and_constant_cases() {
        let mk = |id: &str, sizes: Vec<usize>| {
            let n: usize = sizes.iter().sum();
            let sentences = (0..n).map(|i| sent(&format!("S{i}."))).collect();
            LabeledDocument::from_segment_sizes(id, sentences, sizes).unwrap()
        };
        // One doc with segment sizes [2, 4]: mean 3.0, population std 1.0.
        let s = corpus_stats(&[mk("a", vec![2, 4])]).unwrap();
        assert_eq!(s.seg_len_mean, 3.0);
        assert_eq!(s.seg_len_std, 1.0);
        assert_eq!(s.segs_per_doc_mean, 2.0);
        // Constant segment length 5: std exactly 0.
        let s = corpus_stats(&[mk("a", vec![5, 5]), mk("b", vec![5, 5, 5])]).unwrap();
        assert_eq!(s.seg_len_std, 0.0);
        // Docs with 1, 2, and 3 segments: segs/doc mean 2, std of {1,2,3}.
        let s = corpus_stats(&[mk("a", vec![2]), mk("b", vec![2, 2]), mk("c", vec![2, 2, 2])]).unwrap();
        assert_eq!(s.segs_per_doc_mean, 2.0);
        assert!((s.segs_per_doc_std - (2.0f64 / 3.0).sqrt()).abs() < 1e-4);
        assert!((s.segs_per_doc_std - 0.8165).abs() < 1e-4);
    }
}
