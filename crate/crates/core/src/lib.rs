//! Korean (sub-)character feature encodings and recurrent text classifiers.
//!
//! The crate covers the whole experimental pipeline:
//!
//! - [`hangul`]: code-point classification and syllable/jamo arithmetic
//! - [`encodings`]: the five per-symbol vector schemes and their resources
//! - [`featurizer`]: right-aligned fixed-length feature matrices
//! - [`datasets`]: TSV corpus loaders, validation splits, class weights
//! - [`nn`]: from-scratch BiLSTM and self-attentive BiLSTM with exact
//!   reverse-mode gradients and Adam
//! - [`trainer`]: mini-batch training, model selection, evaluation
//! - [`metrics`]: confusion matrices and F1 scores
//! - [`synth`]: deterministic synthetic fixtures for tests and demos

pub mod datasets;
pub mod encodings;
pub mod featurizer;
pub mod hangul;
pub mod metrics;
pub mod nn;
pub mod synth;
pub mod trainer;
