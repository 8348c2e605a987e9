//! Deterministic numerical core: LSTM cells, stacked bidirectional LSTMs,
//! temporal max-pooling, a dense output layer, softmax, hand-derived
//! reverse-mode gradients, SGD, and a finite-difference gradient checker.
//!
//! Everything is `f64` and allocation-simple; documents here are short enough
//! that clarity wins over blocked matrix kernels.

mod checkpoint;
mod gradcheck;
mod lstm;
mod ops;
mod params;
mod tensor;

pub use checkpoint::{
    load_into, read_checkpoint, write_checkpoint, CheckpointError, RawBlock, RawCheckpoint,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use gradcheck::{grad_check, GradCheckReport};
pub use lstm::{
    bilstm_forward, lstm_cell_forward, xavier_uniform, BiLayer, BiLstmParams, LstmCellParams,
};
pub(crate) use lstm::{bilstm_backward, bilstm_run, BiCache};
pub use ops::{dense_forward, max_pool_time, max_pool_time_argmax, softmax2, DenseParams};
pub use params::{global_grad_norm, sgd_step, ParamSet};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("{context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },
    #[error("{context}: non-finite value")]
    NonFiniteValue { context: &'static str },
    #[error("non-finite activation in {context}")]
    NonFiniteActivation { context: &'static str },
    #[error("non-finite gradient")]
    NonFiniteGradient,
}

pub use tensor::Tensor2;

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
