//! Document-level SGD training: the summed cross-entropy objective, the
//! epoch loop with optional shuffling and early stopping, and loss history.

use crate::corpus::LabeledDocument;
use crate::embeddings::EmbeddingTable;
use crate::model::{backward_doc, forward_doc, ModelError, ModelParams, PROB_CLAMP};
use crate::nn::{global_grad_norm, sgd_step};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("early stopping requires a non-empty dev set")]
    EmptyDev,
    #[error("probabilities have length {p_len} but labels have length {y_len}")]
    LengthMismatch { p_len: usize, y_len: usize },
    #[error("non-finite loss or gradient at epoch {epoch}, document {doc}")]
    NonFiniteLoss { epoch: usize, doc: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("checkpoint hook failed: {0}")]
    Hook(#[source] std::io::Error),
}

/// Knobs for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    /// Global-norm gradient clip; `None` disables clipping.
    pub clip: Option<f64>,
    pub seed: u64,
    /// Shuffle document order each epoch (seeded).
    pub shuffle: bool,
    /// Stop after `EARLY_STOP_PATIENCE` epochs without dev-loss improvement.
    pub early_stopping: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.1,
            epochs: 10,
            clip: None,
            seed: 13,
            shuffle: true,
            early_stopping: false,
        }
    }
}

/// Consecutive non-improving epochs tolerated before early stopping.
pub const EARLY_STOP_PATIENCE: usize = 3;

/// Per-epoch record of a training run. `dev_loss` entries are `NaN`
/// (serialized as `null`) when no dev set was given; lengths equal the
/// number of completed epochs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub dev_loss: Vec<Option<f64>>,
    pub epoch_seconds: Vec<f64>,
}

/// Summed binary cross-entropy over boundary positions:
/// J = Σᵢ −yᵢ·log pᵢ − (1−yᵢ)·log(1−pᵢ), with p clamped away from 0 and 1.
pub fn doc_loss(p: &[f64], y: &[u8]) -> Result<f64, TrainError> {
    if p.len() != y.len() {
        return Err(TrainError::LengthMismatch {
            p_len: p.len(),
            y_len: y.len(),
        });
    }
    let mut loss = 0.0;
    for (&pi, &yi) in p.iter().zip(y) {
        let pi = pi.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        loss -= if yi == 1 { pi.ln() } else { (1.0 - pi).ln() };
    }
    Ok(loss)
}

/// Mean `doc_loss` over a document set. Returns `None` for an empty set.
pub fn mean_corpus_loss(
    params: &ModelParams,
    corpus: &[LabeledDocument],
    table: &EmbeddingTable,
) -> Result<Option<f64>, TrainError> {
    if corpus.is_empty() {
        return Ok(None);
    }
    let mut total = 0.0;
    for doc in corpus {
        let tape = forward_doc(params, doc, table)?;
        total += doc_loss(tape.probs(), &doc.labels)?;
    }
    Ok(Some(total / corpus.len() as f64))
}

/// Trains `params` in place over the corpus, one SGD step per document.
///
/// `on_improve` fires whenever epoch-end dev loss improves on the best seen
/// so far (never for an empty dev set) — the hook is where callers write
/// their best-so-far checkpoint. Returns the final parameters and history.
pub fn train(
    mut params: ModelParams,
    corpus: &[LabeledDocument],
    dev: &[LabeledDocument],
    table: &EmbeddingTable,
    cfg: &TrainConfig,
    mut on_improve: impl FnMut(usize, &ModelParams) -> std::io::Result<()>,
) -> Result<(ModelParams, TrainHistory), TrainError> {
    if corpus.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    if cfg.early_stopping && dev.is_empty() {
        return Err(TrainError::EmptyDev);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut history = TrainHistory::default();
    let mut best_dev = f64::INFINITY;
    let mut since_improve = 0usize;
    for epoch in 0..cfg.epochs {
        let started = Instant::now();
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for &idx in &order {
            let doc = &corpus[idx];
            let tape = forward_doc(&params, doc, table)?;
            let loss = doc_loss(tape.probs(), &doc.labels)?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    doc: doc.id.clone(),
                });
            }
            let grads = backward_doc(&params, &tape, &doc.labels)?;
            if !global_grad_norm(&grads).is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    doc: doc.id.clone(),
                });
            }
            sgd_step(&mut params, &grads, cfg.lr, cfg.clip).map_err(ModelError::from)?;
            epoch_loss += loss;
        }
        history.train_loss.push(epoch_loss / corpus.len() as f64);
        let dev_loss = mean_corpus_loss(&params, dev, table)?;
        history.dev_loss.push(dev_loss);
        history.epoch_seconds.push(started.elapsed().as_secs_f64());
        if let Some(dl) = dev_loss {
            if dl < best_dev {
                best_dev = dl;
                since_improve = 0;
                on_improve(epoch, &params).map_err(TrainError::Hook)?;
            } else {
                since_improve += 1;
            }
        }
        if cfg.early_stopping && since_improve >= EARLY_STOP_PATIENCE {
            break;
        }
    }
    Ok((params, history))
}
