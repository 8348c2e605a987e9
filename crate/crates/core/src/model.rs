//! The hierarchical segmentation network.
//!
//! Two sub-networks with independent parameters: a word-level 2-layer
//! bidirectional LSTM whose outputs are max-pooled into one embedding per
//! sentence, and a sentence-level 2-layer bidirectional LSTM whose per-step
//! outputs pass through a dense layer and two-way softmax. Position i scores
//! whether sentence i ends a segment; the final position is dropped (the last
//! sentence always ends one), leaving n − 1 probabilities.

use crate::corpus::LabeledDocument;
use crate::embeddings::{embed_sentence, sentence_tokens, EmbeddingTable};
use crate::nn::{
    self, bilstm_backward, bilstm_run, load_into, max_pool_time_argmax, read_checkpoint,
    softmax2, write_checkpoint, BiCache, BiLstmParams, CheckpointError, DenseParams, NnError,
    ParamSet, RawCheckpoint, Tensor2,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

/// Both sub-networks are two-layer stacks.
pub const NUM_LAYERS: usize = 2;
/// Sentences longer than this many tokens are truncated.
pub const DEFAULT_TOKEN_CAP: usize = 256;
/// Softmax index carrying "ends a segment"; index 0 is "continues".
pub const BOUNDARY_INDEX: usize = 1;
/// Probabilities are clamped to [PROB_CLAMP, 1 − PROB_CLAMP] inside the loss;
/// clamped positions contribute zero gradient.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("document {id} has {n} sentence(s); need at least 2")]
    DocumentTooShort { id: String, n: usize },
    #[error("embedding table dimension {table_dim} does not match model dimension {model_dim}")]
    EmbeddingDimMismatch { table_dim: usize, model_dim: usize },
    #[error("document {id}: labels have length {found}, expected {expected}")]
    LabelLength {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// Model hyperparameters. `embed_dim` must match the embedding table the
/// model is used with; `seed` fixes initialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub h1: usize,
    pub h2: usize,
    pub seed: u64,
    pub token_cap: usize,
}

impl ModelConfig {
    pub fn new(embed_dim: usize, h1: usize, h2: usize, seed: u64) -> Self {
        ModelConfig {
            embed_dim,
            h1,
            h2,
            seed,
            token_cap: DEFAULT_TOKEN_CAP,
        }
    }
}

/// All trainable parameters plus the config that shaped them.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    config: ModelConfig,
    pub encoder: BiLstmParams,
    pub predictor: BiLstmParams,
    pub output: DenseParams,
}

impl ModelParams {
    /// Seeded initialization per the numerical core's scheme. Draw order is
    /// fixed: encoder layers, predictor layers, then the dense matrix.
    pub fn init(cfg: &ModelConfig) -> Self {
        assert!(
            cfg.embed_dim > 0 && cfg.h1 > 0 && cfg.h2 > 0 && cfg.token_cap > 0,
            "model dimensions must be positive"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let encoder = BiLstmParams::init(cfg.embed_dim, cfg.h1, NUM_LAYERS, &mut rng);
        let predictor = BiLstmParams::init(2 * cfg.h1, cfg.h2, NUM_LAYERS, &mut rng);
        let mut output = DenseParams::zeros(2 * cfg.h2, 2);
        for v in output.w.data_mut() {
            *v = nn::xavier_uniform(&mut rng, 2 * cfg.h2, 2);
        }
        ModelParams {
            config: cfg.clone(),
            encoder,
            predictor,
            output,
        }
    }

    /// A same-shape container of zeros, the starting point for gradient
    /// accumulation.
    pub fn zeros_like(&self) -> ModelParams {
        let cfg = &self.config;
        ModelParams {
            config: cfg.clone(),
            encoder: BiLstmParams::zeros(cfg.embed_dim, cfg.h1, NUM_LAYERS),
            predictor: BiLstmParams::zeros(2 * cfg.h1, cfg.h2, NUM_LAYERS),
            output: DenseParams::zeros(2 * cfg.h2, 2),
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Writes a checkpoint: config metadata plus every parameter block.
    pub fn save<W: Write>(&self, w: W) -> std::io::Result<()> {
        let cfg = &self.config;
        let meta = vec![
            ("d".to_string(), cfg.embed_dim.to_string()),
            ("h1".to_string(), cfg.h1.to_string()),
            ("h2".to_string(), cfg.h2.to_string()),
            ("cap".to_string(), cfg.token_cap.to_string()),
            ("seed".to_string(), cfg.seed.to_string()),
            ("layers".to_string(), NUM_LAYERS.to_string()),
            ("boundary_index".to_string(), BOUNDARY_INDEX.to_string()),
        ];
        write_checkpoint(w, &meta, self)
    }

    /// Reads a checkpoint, rebuilding the config from metadata and rejecting
    /// any block-shape disagreement.
    pub fn load<R: Read>(r: R) -> Result<Self, ModelError> {
        let raw = read_checkpoint(r)?;
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawCheckpoint) -> Result<Self, ModelError> {
        let cfg = ModelConfig {
            embed_dim: raw.meta_parse("d")?,
            h1: raw.meta_parse("h1")?,
            h2: raw.meta_parse("h2")?,
            token_cap: raw.meta_parse("cap")?,
            seed: raw.meta_parse("seed")?,
        };
        let layers: usize = raw.meta_parse("layers")?;
        if layers != NUM_LAYERS {
            return Err(CheckpointError::BadMeta {
                key: "layers".into(),
                value: layers.to_string(),
            }
            .into());
        }
        let boundary: usize = raw.meta_parse("boundary_index")?;
        if boundary != BOUNDARY_INDEX {
            return Err(CheckpointError::BadMeta {
                key: "boundary_index".into(),
                value: boundary.to_string(),
            }
            .into());
        }
        let mut params = ModelParams {
            config: cfg.clone(),
            encoder: BiLstmParams::zeros(cfg.embed_dim, cfg.h1, NUM_LAYERS),
            predictor: BiLstmParams::zeros(2 * cfg.h1, cfg.h2, NUM_LAYERS),
            output: DenseParams::zeros(2 * cfg.h2, 2),
        };
        load_into(raw, &mut params)?;
        Ok(params)
    }
}

impl ParamSet for ModelParams {
    fn visit(&self, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        self.encoder
            .visit(&mut |name, shape, data| f(&format!("encoder.{name}"), shape, data));
        self.predictor
            .visit(&mut |name, shape, data| f(&format!("predictor.{name}"), shape, data));
        self.output
            .visit(&mut |name, shape, data| f(&format!("output.{name}"), shape, data));
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &[usize], &mut [f64])) {
        self.encoder
            .visit_mut(&mut |name, shape, data| f(&format!("encoder.{name}"), shape, data));
        self.predictor
            .visit_mut(&mut |name, shape, data| f(&format!("predictor.{name}"), shape, data));
        self.output
            .visit_mut(&mut |name, shape, data| f(&format!("output.{name}"), shape, data));
    }

    fn zip_mut(
        &mut self,
        other: &Self,
        f: &mut dyn FnMut(&mut [f64], &[f64]),
    ) -> Result<(), NnError> {
        self.encoder.zip_mut(&other.encoder, f)?;
        self.predictor.zip_mut(&other.predictor, f)?;
        self.output.zip_mut(&other.output, f)
    }
}

/// Gradients mirror the parameter container.
pub type ModelGrads = ModelParams;

/// Word vectors for one document's sentences, truncated at the token cap.
/// Exposed so callers can embed once and reuse across forward passes.
pub fn embed_document(
    params: &ModelParams,
    doc: &LabeledDocument,
    table: &EmbeddingTable,
) -> Result<Vec<Vec<Vec<f64>>>, ModelError> {
    if table.dim() != params.config.embed_dim {
        return Err(ModelError::EmbeddingDimMismatch {
            table_dim: table.dim(),
            model_dim: params.config.embed_dim,
        });
    }
    Ok(doc
        .sentences
        .iter()
        .map(|s| {
            let mut tokens = sentence_tokens(s);
            tokens.truncate(params.config.token_cap);
            embed_sentence(&tokens, table)
        })
        .collect())
}

/// Everything recorded during a forward pass that the backward pass needs.
pub struct DocTape {
    sent_caches: Vec<SentTape>,
    pred_cache: BiCache,
    /// Predictor outputs, one 2h₂ row per sentence.
    states: Tensor2,
    /// Dense-layer outputs per sentence.
    logits: Vec<[f64; 2]>,
    /// Boundary probabilities for positions 0..n−1.
    probs: Vec<f64>,
}

struct SentTape {
    cache: BiCache,
    argmax: Vec<usize>,
    t_len: usize,
}

impl DocTape {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Full forward pass over one document, recording a tape for backprop.
pub fn forward_doc(
    params: &ModelParams,
    doc: &LabeledDocument,
    table: &EmbeddingTable,
) -> Result<DocTape, ModelError> {
    let n = doc.n();
    if n < 2 {
        return Err(ModelError::DocumentTooShort {
            id: doc.id.clone(),
            n,
        });
    }
    let embedded = embed_document(params, doc, table)?;
    let mut sent_caches = Vec::with_capacity(n);
    let mut sentence_embeddings = Vec::with_capacity(n);
    for vectors in &embedded {
        let (out, cache) = bilstm_run(&params.encoder, vectors)?;
        let (pooled, argmax) = max_pool_time_argmax(&out);
        sent_caches.push(SentTape {
            cache,
            argmax,
            t_len: out.rows(),
        });
        sentence_embeddings.push(pooled);
    }
    let (states, pred_cache) = bilstm_run(&params.predictor, &sentence_embeddings)?;
    let mut logits = Vec::with_capacity(n);
    let mut probs = Vec::with_capacity(n - 1);
    for i in 0..n {
        let z = params.output.forward(states.row(i))?;
        let pair = [z[0], z[1]];
        if !pair[0].is_finite() || !pair[1].is_finite() {
            return Err(NnError::NonFiniteActivation { context: "output logits" }.into());
        }
        if i < n - 1 {
            probs.push(softmax2(pair)[BOUNDARY_INDEX]);
        }
        logits.push(pair);
    }
    Ok(DocTape {
        sent_caches,
        pred_cache,
        states,
        logits,
        probs,
    })
}

/// Boundary probabilities for one document: length n − 1, entries in (0, 1).
pub fn predict_probs(
    params: &ModelParams,
    doc: &LabeledDocument,
    table: &EmbeddingTable,
) -> Result<Vec<f64>, ModelError> {
    Ok(forward_doc(params, doc, table)?.probs)
}

/// One sentence's embedding e = max-pool(BiLSTM(word vectors)).
pub fn encode_sentence(params: &ModelParams, vectors: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    let out = nn::bilstm_forward(&params.encoder, vectors)?;
    Ok(nn::max_pool_time(&out))
}

/// Backward pass for the summed cross-entropy loss over boundary positions.
/// The gradient seed at each position is the fused softmax+cross-entropy
/// form: d_logits = p − onehot(y). Position n−1 is ignored, and positions
/// whose probability sits outside the clamp range contribute nothing (the
/// clamped loss is flat there).
pub fn backward_doc(
    params: &ModelParams,
    tape: &DocTape,
    labels: &[u8],
) -> Result<ModelGrads, ModelError> {
    let n = tape.logits.len();
    if labels.len() != n - 1 {
        return Err(ModelError::LabelLength {
            id: String::new(),
            expected: n - 1,
            found: labels.len(),
        });
    }
    let mut grads = params.zeros_like();
    let h2_out = params.predictor.output_size();
    let mut d_states = Tensor2::zeros(n, h2_out);
    for i in 0..n - 1 {
        let p = softmax2(tape.logits[i]);
        let p_boundary = p[BOUNDARY_INDEX];
        if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p_boundary) {
            continue;
        }
        let y = labels[i] as f64;
        let d_logit = [p[0] - (1.0 - y), p[1] - y];
        grads.output.w.add_outer(&d_logit, tape.states.row(i));
        grads.output.b[0] += d_logit[0];
        grads.output.b[1] += d_logit[1];
        let dx = params.output.w.matvec_t(&d_logit);
        d_states.row_mut(i).copy_from_slice(&dx);
    }
    let d_embeddings = bilstm_backward(
        &params.predictor,
        &tape.pred_cache,
        &d_states,
        &mut grads.predictor,
    );
    let enc_out = params.encoder.output_size();
    for (sent, d_e) in tape.sent_caches.iter().zip(&d_embeddings) {
        // Max-pool backward: each pooled component routes its gradient to
        // the first timestep that attained the maximum.
        let mut d_out = Tensor2::zeros(sent.t_len, enc_out);
        for (c, &t) in sent.argmax.iter().enumerate() {
            d_out.set(t, c, d_e[c]);
        }
        bilstm_backward(&params.encoder, &sent.cache, &d_out, &mut grads.encoder);
    }
    if nn::global_grad_norm(&grads).is_finite() {
        Ok(grads)
    } else {
        Err(NnError::NonFiniteGradient.into())
    }
}
