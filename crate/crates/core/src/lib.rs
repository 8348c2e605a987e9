//! Supervised text segmentation toolkit.
//!
//! The pipeline runs in five stages: build a corpus of labeled documents from
//! section-annotated text files ([`corpus`]), embed sentences with pretrained
//! word vectors ([`embeddings`]), score candidate segment boundaries with a
//! hierarchical bidirectional LSTM trained from scratch ([`model`], [`train`]),
//! decode boundary probabilities into a segmentation ([`infer`]), and measure
//! agreement with the reference using the Pk metric ([`metrics`]).
//!
//! All numeric work is plain `f64` on the CPU; every random choice flows from
//! an explicit seed, so corpus splits, initialization, training, and decoding
//! are reproducible bit for bit.

pub mod corpus;
pub mod embeddings;
pub mod infer;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod train;
