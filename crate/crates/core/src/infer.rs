//! Greedy threshold decoding and validation-set threshold tuning.
//!
//! The model emits one boundary probability per sentence position; decoding
//! places a boundary wherever that probability strictly exceeds a threshold
//! τ. The threshold itself is a free parameter, chosen on a held-out set by
//! sweeping a fixed 101-point grid over [0, 1] and keeping the smallest τ
//! that minimises mean sentence-level Pk.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledDocument;
use crate::embeddings::EmbeddingTable;
use crate::metrics::{self, MetricsError};
use crate::model::{predict_probs, ModelError, ModelParams};

/// A predicted segmentation: `boundaries[i] == 1` means a new segment starts
/// after sentence `i`. Length is `n - 1`; the final sentence implicitly ends
/// the last segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub boundaries: Vec<u8>,
}

impl Hypothesis {
    pub fn from_boundaries(boundaries: Vec<u8>) -> Self {
        debug_assert!(boundaries.iter().all(|&b| b <= 1));
        Hypothesis { boundaries }
    }

    /// Number of sentences the hypothesis describes.
    pub fn n(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn boundary_count(&self) -> usize {
        self.boundaries.iter().filter(|&&b| b == 1).count()
    }

    /// Segment sizes implied by the boundary vector; always positive and
    /// summing to `n` because the final segment is implicit.
    pub fn segment_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut current = 0usize;
        for &b in &self.boundaries {
            current += 1;
            if b == 1 {
                sizes.push(current);
                current = 0;
            }
        }
        sizes.push(current + 1);
        sizes
    }
}

#[derive(Debug, Error)]
pub enum InferError {
    /// Threshold tuning needs at least one scorable validation document.
    #[error("threshold tuning requires a non-empty dev set with at least one scorable document")]
    EmptyDev,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Thresholds swept when tuning: 0.00, 0.01, …, 1.00.
pub fn threshold_grid() -> Vec<f64> {
    (0..=100).map(|i| f64::from(i) / 100.0).collect()
}

/// Places a boundary wherever `p[i] > tau`, strictly. An empty `p` (a
/// one-sentence document) yields the single-segment hypothesis.
pub fn greedy_decode(p: &[f64], tau: f64) -> Hypothesis {
    debug_assert!(p.iter().all(|&x| x > 0.0 && x < 1.0));
    debug_assert!((0.0..=1.0).contains(&tau));
    Hypothesis {
        boundaries: p.iter().map(|&x| u8::from(x > tau)).collect(),
    }
}

/// Runs the model over every dev document and picks the threshold that
/// minimises corpus-mean sentence-level Pk. Returns `(tau_star, dev_pk)`;
/// ties go to the smallest τ on the grid.
pub fn tune_threshold(
    params: &ModelParams,
    dev: &[LabeledDocument],
    table: &EmbeddingTable,
) -> Result<(f64, f64), InferError> {
    if dev.is_empty() {
        return Err(InferError::EmptyDev);
    }
    let probs: Vec<Vec<f64>> = dev
        .iter()
        .map(|doc| predict_probs(params, doc, table))
        .collect::<Result<_, _>>()?;
    tune_threshold_on_probs(&probs, dev)
}

/// Same sweep as [`tune_threshold`] but over boundary probabilities computed
/// elsewhere; `probs[i]` must belong to `dev[i]`. Documents whose Pk window
/// does not fit (`k ≥ n`) are skipped; if none remain the dev set counts as
/// empty.
pub fn tune_threshold_on_probs(
    probs: &[Vec<f64>],
    dev: &[LabeledDocument],
) -> Result<(f64, f64), InferError> {
    assert_eq!(probs.len(), dev.len(), "one probability vector per document");
    let scorable: Vec<(&Vec<f64>, &LabeledDocument, usize)> = probs
        .iter()
        .zip(dev)
        .filter_map(|(p, doc)| {
            let k = metrics::window_size(&doc.segment_sizes);
            (k < doc.n()).then_some((p, doc, k))
        })
        .collect();
    if scorable.is_empty() {
        return Err(InferError::EmptyDev);
    }
    Ok(best_threshold(&threshold_grid(), &scorable))
}

/// Exhaustive sweep over `grid`, strict-less comparison so the first (and
/// therefore smallest) τ achieving the minimum wins.
fn best_threshold(grid: &[f64], scorable: &[(&Vec<f64>, &LabeledDocument, usize)]) -> (f64, f64) {
    assert!(!grid.is_empty() && !scorable.is_empty());
    let mut best = (f64::NAN, f64::INFINITY);
    for &tau in grid {
        let mut total = 0.0;
        for &(p, doc, k) in scorable {
            let hyp = greedy_decode(p, tau);
            total += metrics::pk_sentences(&doc.labels, &hyp, k)
                .expect("scorable documents were pre-filtered");
        }
        let mean = total / scorable.len() as f64;
        if mean < best.1 {
            best = (tau, mean);
        }
    }
    best
}

/// One document's worth of prediction output: the probabilities the model
/// produced and the segmentation they decode to at the given threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub tau: f64,
    pub probs: Vec<f64>,
    pub boundaries: Vec<u8>,
    pub segment_sizes: Vec<usize>,
}

impl PredictionRecord {
    pub fn new(id: impl Into<String>, probs: Vec<f64>, tau: f64) -> Self {
        let hyp = greedy_decode(&probs, tau);
        PredictionRecord {
            id: id.into(),
            tau,
            segment_sizes: hyp.segment_sizes(),
            boundaries: hyp.boundaries,
            probs,
        }
    }
}
