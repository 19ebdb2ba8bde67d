//! Mini-batch training with validation-based model selection, test-set
//! evaluation and the scheme x architecture experiment matrix.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::{class_weights, split_validation, DatasetError, LabeledExample, SplitSpec};
use crate::encodings::{
    CharVocabulary, DenseVectorTable, Encoder, EncodingError, EncodingScheme, VectorLoadError,
};
use crate::featurizer::featurize;
use crate::metrics::{ConfusionMatrix, EvalReport};
use crate::nn::{
    adam_step, backward, forward, init_params, loss_weighted_xent, AdamConfig, AdamState,
    Architecture, ModelConfig, ModelParams,
};

/// The two benchmark tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Nsmc,
    #[serde(rename = "3i4k")]
    ThreeI4k,
}

impl Task {
    pub fn classes(self) -> usize {
        match self {
            Task::Nsmc => 2,
            Task::ThreeI4k => 7,
        }
    }

    pub fn default_batch(self) -> usize {
        match self {
            Task::Nsmc => 64,
            Task::ThreeI4k => 16,
        }
    }

    /// Published sequence lengths: jamo-level features run three times as
    /// long as the character-level ones.
    pub fn default_seq_len(self, scheme: EncodingScheme) -> usize {
        match (self, scheme.is_jamo_level()) {
            (Task::Nsmc, true) => 420,
            (Task::Nsmc, false) => 140,
            (Task::ThreeI4k, true) => 240,
            (Task::ThreeI4k, false) => 80,
        }
    }

    /// Class weighting compensates the intention corpus' volume imbalance.
    pub fn default_class_weights(self) -> bool {
        matches!(self, Task::ThreeI4k)
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Nsmc => "nsmc",
            Task::ThreeI4k => "3i4k",
        }
    }

    pub fn load(
        self,
        train_file: &std::path::Path,
        test_file: &std::path::Path,
    ) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>), DatasetError> {
        match self {
            Task::Nsmc => crate::datasets::load_nsmc(train_file, test_file),
            Task::ThreeI4k => crate::datasets::load_3i4k(train_file, test_file),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nsmc" => Ok(Task::Nsmc),
            "3i4k" => Ok(Task::ThreeI4k),
            other => Err(format!("unknown task '{other}' (expected nsmc|3i4k)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Vectors(#[from] VectorLoadError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("{0}")]
    Resource(String),
}

/// Loop hyperparameters; widths and defaults follow the published setup and
/// every field stays overridable.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub task: Task,
    pub scheme: EncodingScheme,
    pub arch: Architecture,
    pub batch_size: usize,
    pub lr: f64,
    pub max_epochs: usize,
    /// Epochs without validation improvement tolerated before stopping.
    pub patience: usize,
    pub seed: u64,
    pub use_class_weights: bool,
    pub max_len: usize,
    /// Print one line per epoch.
    pub verbose: bool,
}

impl TrainConfig {
    pub fn new(task: Task, scheme: EncodingScheme, arch: Architecture) -> Self {
        TrainConfig {
            task,
            scheme,
            arch,
            batch_size: task.default_batch(),
            lr: 5e-4,
            max_epochs: 50,
            patience: 5,
            seed: 0,
            use_class_weights: task.default_class_weights(),
            max_len: task.default_seq_len(scheme),
            verbose: false,
        }
    }

    /// Model for this configuration, given the encoder's vector width.
    pub fn model_config(&self, input_dim: usize) -> ModelConfig {
        match self.arch {
            Architecture::BiLstm => {
                ModelConfig::bilstm(input_dim, self.max_len, self.task.classes())
            }
            Architecture::BiLstmSa => {
                ModelConfig::bilstm_sa(input_dim, self.max_len, self.task.classes())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best validation epoch.
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
}

// Fixed-size work chunks keep the gradient reduction order independent of
// the rayon schedule, so a seed fully determines a run.
const GRAD_CHUNK: usize = 8;
const EVAL_CHUNK: usize = 128;

fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

fn predict_label(model: &ModelConfig, params: &ModelParams, enc: &Encoder, text: &str) -> usize {
    let matrix = featurize(enc, text, model.seq_len);
    let tape = forward(model, params, matrix.rows(), None);
    argmax(tape.probs())
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Deterministic inference-mode pass over a labeled set.
pub fn evaluate(
    model: &ModelConfig,
    params: &ModelParams,
    enc: &Encoder,
    data: &[LabeledExample],
) -> EvalReport {
    let classes = model.num_classes;
    let confusion = data
        .par_chunks(EVAL_CHUNK)
        .map(|chunk| {
            let mut m = ConfusionMatrix::new(classes);
            for ex in chunk {
                m.record(ex.label, predict_label(model, params, enc, &ex.text));
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(ConfusionMatrix::new(classes), |mut acc, m| {
            acc.merge(&m);
            acc
        });
    EvalReport::from_confusion(confusion)
}

struct BatchGrads {
    grads: Vec<f64>,
    loss_sum: f64,
}

#[allow(clippy::too_many_arguments)]
fn batch_gradients(
    model: &ModelConfig,
    params: &ModelParams,
    enc: &Encoder,
    train_set: &[LabeledExample],
    batch: &[usize],
    weights: &[f64],
    seed: u64,
    epoch: usize,
    batch_idx: usize,
) -> BatchGrads {
    let chunk_results: Vec<BatchGrads> = batch
        .par_chunks(GRAD_CHUNK)
        .enumerate()
        .map(|(chunk_idx, chunk)| {
            let mut grads = vec![0.0; params.len()];
            let mut loss_sum = 0.0;
            for (slot, &idx) in chunk.iter().enumerate() {
                let ex = &train_set[idx];
                let matrix = featurize(enc, &ex.text, model.seq_len);
                let example_tag =
                    (epoch as u64) << 40 | (batch_idx as u64) << 20 | (chunk_idx * GRAD_CHUNK + slot) as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, example_tag, 0x5eed));
                let tape = forward(model, params, matrix.rows(), Some(&mut rng));
                let w = weights[ex.label];
                loss_sum += loss_weighted_xent(tape.probs(), ex.label, w);
                backward(model, params, matrix.rows(), &tape, ex.label, w, &mut grads);
            }
            BatchGrads { grads, loss_sum }
        })
        .collect();

    // fixed-order reduction
    let mut total = BatchGrads { grads: vec![0.0; params.len()], loss_sum: 0.0 };
    for part in chunk_results {
        for (g, p) in total.grads.iter_mut().zip(&part.grads) {
            *g += p;
        }
        total.loss_sum += part.loss_sum;
    }
    total
}

/// Train with per-epoch validation, retaining the parameters of the best
/// validation epoch (ties resolve toward the earlier epoch). Stops at
/// `max_epochs` or once more than `patience` epochs pass without
/// improvement.
pub fn train(
    cfg: &TrainConfig,
    model: &ModelConfig,
    enc: &Encoder,
    train_set: &[LabeledExample],
    val_set: &[LabeledExample],
) -> Result<TrainOutcome, TrainError> {
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    let classes = model.num_classes;
    for ex in train_set.iter().chain(val_set) {
        if ex.label >= classes {
            return Err(TrainError::LabelOutOfRange { label: ex.label, classes });
        }
    }
    let weights = if cfg.use_class_weights {
        class_weights(train_set, classes)?
    } else {
        vec![1.0; classes]
    };

    let mut params = init_params(model, cfg.seed);
    let adam_cfg = AdamConfig::with_lr(cfg.lr);
    let mut adam = AdamState::new(params.len());

    let mut history = Vec::new();
    let mut best: Option<(usize, f64, ModelParams)> = None;
    let mut wait = 0usize;

    for epoch in 1..=cfg.max_epochs {
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, epoch as u64, 0x0d9e));
        order.shuffle(&mut shuffle_rng);

        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for (batch_idx, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut acc =
                batch_gradients(model, &params, enc, train_set, batch, &weights, cfg.seed, epoch, batch_idx);
            let scale = 1.0 / batch.len() as f64;
            for g in acc.grads.iter_mut() {
                *g *= scale;
            }
            let batch_loss = acc.loss_sum * scale;
            if !batch_loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch: batch_idx, loss: batch_loss });
            }
            adam_step(&adam_cfg, &mut adam, params.values_mut(), &acc.grads);
            epoch_loss += batch_loss;
            batches += 1;
        }

        let val_accuracy = if val_set.is_empty() {
            0.0
        } else {
            evaluate(model, &params, enc, val_set).accuracy
        };
        let record =
            EpochRecord { epoch, train_loss: epoch_loss / batches as f64, val_accuracy };
        if cfg.verbose {
            println!(
                "epoch {:>3}  train_loss={:.4}  val_acc={:.4}",
                record.epoch, record.train_loss, record.val_accuracy
            );
        }
        history.push(record);

        let improved = best.as_ref().map(|(_, acc, _)| val_accuracy > *acc).unwrap_or(true);
        if improved {
            best = Some((epoch, val_accuracy, params.clone()));
            wait = 0;
        } else {
            wait += 1;
            if wait > cfg.patience {
                break;
            }
        }
    }

    let (best_epoch, best_val_accuracy, best_params) =
        best.ok_or(TrainError::EmptyTrainingSet)?;
    Ok(TrainOutcome { params: best_params, history, best_epoch, best_val_accuracy })
}

/// One cell of the experiment matrix.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixCell {
    pub task: Task,
    pub scheme: EncodingScheme,
    pub arch: Architecture,
    pub param_count: usize,
    pub accuracy: f64,
    /// Reported for the seven-class task only, like the published table.
    pub macro_f1: Option<f64>,
    pub weighted_f1: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixTask {
    pub task: Task,
    pub train_file: PathBuf,
    pub test_file: PathBuf,
}

fn default_schemes() -> Vec<EncodingScheme> {
    EncodingScheme::ALL.to_vec()
}

fn default_archs() -> Vec<Architecture> {
    vec![Architecture::BiLstm, Architecture::BiLstmSa]
}

fn default_epochs() -> usize {
    50
}

fn default_patience() -> usize {
    5
}

/// Grid description for [`run_matrix`]; deserializable from a TOML or JSON
/// config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixConfig {
    pub tasks: Vec<MatrixTask>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<EncodingScheme>,
    #[serde(default = "default_archs")]
    pub archs: Vec<Architecture>,
    /// Dense vector file, required when the grid includes the dense scheme.
    #[serde(default)]
    pub vectors: Option<PathBuf>,
    /// Vocabulary file for the one-hot scheme; built from the train split
    /// when absent.
    #[serde(default)]
    pub vocab: Option<PathBuf>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub batch: Option<usize>,
    #[serde(default)]
    pub max_len: Option<usize>,
    #[serde(default)]
    pub verbose: bool,
}

/// Build the encoder a scheme needs, loading or deriving its resources.
pub fn build_encoder(
    scheme: EncodingScheme,
    vocab_file: Option<&std::path::Path>,
    vectors_file: Option<&std::path::Path>,
    train_texts: &[LabeledExample],
) -> Result<Encoder, TrainError> {
    match scheme {
        EncodingScheme::Jamo67 => Ok(Encoder::Jamo67),
        EncodingScheme::Jamo118 => Ok(Encoder::Jamo118),
        EncodingScheme::CharMultiHot => Ok(Encoder::CharMultiHot),
        EncodingScheme::CharOneHot => {
            let vocab = match vocab_file {
                Some(path) => CharVocabulary::load(path)?,
                None => CharVocabulary::from_corpus(train_texts.iter().map(|e| e.text.as_str())),
            };
            if vocab.is_empty() {
                return Err(TrainError::Resource(
                    "one-hot vocabulary is empty; provide a vocabulary file or a non-empty corpus"
                        .into(),
                ));
            }
            Ok(Encoder::CharOneHot(vocab))
        }
        EncodingScheme::CharDense => {
            let path = vectors_file.ok_or_else(|| {
                TrainError::Resource("the dense scheme requires a vector file".into())
            })?;
            Ok(Encoder::CharDense(DenseVectorTable::load(path)?))
        }
    }
}

/// Run every (task, scheme, architecture) combination of the grid.
pub fn run_matrix(cfg: &MatrixConfig) -> Result<Vec<MatrixCell>, TrainError> {
    let mut cells = Vec::new();
    for task_spec in &cfg.tasks {
        let task = task_spec.task;
        let (train_full, test) = task.load(&task_spec.train_file, &task_spec.test_file)?;
        let (train_set, val_set) = split_validation(train_full, SplitSpec::new(cfg.seed));
        for &scheme in &cfg.schemes {
            let encoder =
                build_encoder(scheme, cfg.vocab.as_deref(), cfg.vectors.as_deref(), &train_set)?;
            for &arch in &cfg.archs {
                let mut tc = TrainConfig::new(task, scheme, arch);
                tc.max_epochs = cfg.epochs;
                tc.patience = cfg.patience;
                tc.seed = cfg.seed;
                tc.verbose = cfg.verbose;
                if let Some(b) = cfg.batch {
                    tc.batch_size = b;
                }
                if let Some(l) = cfg.max_len {
                    tc.max_len = l;
                }
                let model = tc.model_config(encoder.dim());
                if cfg.verbose {
                    println!(
                        "[matrix] task={task} scheme={scheme} arch={arch} dim={} params={}",
                        encoder.dim(),
                        model.param_count()
                    );
                }
                let outcome = train(&tc, &model, &encoder, &train_set, &val_set)?;
                let report = evaluate(&model, &outcome.params, &encoder, &test);
                let seven_class = task == Task::ThreeI4k;
                cells.push(MatrixCell {
                    task,
                    scheme,
                    arch,
                    param_count: model.param_count(),
                    accuracy: report.accuracy,
                    macro_f1: seven_class.then_some(report.macro_f1),
                    weighted_f1: seven_class.then_some(report.weighted_f1),
                });
            }
        }
    }
    Ok(cells)
}

/// Tab-separated results table mirroring the published layout.
pub fn write_results_table<W: Write>(w: &mut W, cells: &[MatrixCell]) -> std::io::Result<()> {
    writeln!(w, "task\tscheme\tarch\tparams\taccuracy\tmacro_f1\tweighted_f1")?;
    for c in cells {
        let fmt_opt =
            |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{:.4}\t{}\t{}",
            c.task,
            c.scheme,
            c.arch,
            c.param_count,
            c.accuracy,
            fmt_opt(c.macro_f1),
            fmt_opt(c.weighted_f1)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn toy_model(arch: Architecture, classes: usize) -> ModelConfig {
        // scaled-down widths keep unit tests fast; input is the multi-hot scheme
        ModelConfig {
            arch,
            input_dim: 67,
            seq_len: 16,
            num_classes: classes,
            hidden: 6,
            fc_width: 8,
            attn_dim: 5,
            sa_fc_width: 10,
            dropout: if arch == Architecture::BiLstmSa { 0.3 } else { 0.0 },
        }
    }

    fn toy_cfg(arch: Architecture) -> TrainConfig {
        let mut cfg = TrainConfig::new(Task::Nsmc, EncodingScheme::CharMultiHot, arch);
        cfg.batch_size = 16;
        cfg.max_epochs = 30;
        cfg.patience = 30;
        cfg.seed = 7;
        cfg.max_len = 16;
        cfg.lr = 5e-3; // toy problems get few steps, so a larger rate
        cfg
    }

    #[test]
    fn training_loss_decreases_on_a_fixed_batch() {
        let data = synth::sentiment_corpus(16, 5);
        let cfg = toy_cfg(Architecture::BiLstm);
        let model = toy_model(Architecture::BiLstm, 2);
        let outcome = train(&cfg, &model, &Encoder::CharMultiHot, &data, &data).unwrap();
        // single-batch epochs: the first 10 recorded losses are Adam steps
        // on the same batch and should trend down
        let h = &outcome.history;
        assert!(h.len() >= 10);
        assert!(
            h[9].train_loss < h[0].train_loss,
            "loss did not decrease: {} -> {}",
            h[0].train_loss,
            h[9].train_loss
        );
    }

    #[test]
    fn same_seed_same_history() {
        let data = synth::sentiment_corpus(24, 6);
        let (train_set, val_set) = (data[..16].to_vec(), data[16..].to_vec());
        let mut cfg = toy_cfg(Architecture::BiLstmSa);
        cfg.max_epochs = 4;
        let model = toy_model(Architecture::BiLstmSa, 2);
        let a = train(&cfg, &model, &Encoder::CharMultiHot, &train_set, &val_set).unwrap();
        let b = train(&cfg, &model, &Encoder::CharMultiHot, &train_set, &val_set).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.params.values(), b.params.values());
    }

    #[test]
    fn patience_zero_stops_one_epoch_past_best() {
        let data = synth::sentiment_corpus(16, 9);
        let mut cfg = toy_cfg(Architecture::BiLstm);
        cfg.patience = 0;
        cfg.max_epochs = 50;
        let model = toy_model(Architecture::BiLstm, 2);
        let outcome = train(&cfg, &model, &Encoder::CharMultiHot, &data, &data).unwrap();
        let epochs_run = outcome.history.len();
        assert!(epochs_run <= 50);
        if epochs_run < 50 {
            // stopped early: exactly one epoch past the best ran
            assert_eq!(outcome.best_epoch + 1, epochs_run);
        }
    }

    #[test]
    fn returned_params_achieve_best_recorded_accuracy() {
        let data = synth::sentiment_corpus(32, 4);
        let (train_set, val_set) = (data[..24].to_vec(), data[24..].to_vec());
        let mut cfg = toy_cfg(Architecture::BiLstm);
        cfg.max_epochs = 8;
        let model = toy_model(Architecture::BiLstm, 2);
        let outcome = train(&cfg, &model, &Encoder::CharMultiHot, &train_set, &val_set).unwrap();
        let max_acc =
            outcome.history.iter().map(|r| r.val_accuracy).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(outcome.best_val_accuracy, max_acc);
        let report = evaluate(&model, &outcome.params, &Encoder::CharMultiHot, &val_set);
        assert!((report.accuracy - max_acc).abs() < 1e-12);
        // ties resolve toward the earlier epoch
        let first_hit = outcome
            .history
            .iter()
            .find(|r| r.val_accuracy == max_acc)
            .map(|r| r.epoch)
            .unwrap();
        assert_eq!(outcome.best_epoch, first_hit);
    }

    #[test]
    fn class_weighting_is_noop_on_balanced_data() {
        let data = synth::sentiment_corpus(16, 2);
        let model = toy_model(Architecture::BiLstm, 2);
        let mut cfg = toy_cfg(Architecture::BiLstm);
        cfg.max_epochs = 3;
        cfg.use_class_weights = false;
        let plain = train(&cfg, &model, &Encoder::CharMultiHot, &data, &data).unwrap();
        cfg.use_class_weights = true;
        let weighted = train(&cfg, &model, &Encoder::CharMultiHot, &data, &data).unwrap();
        assert_eq!(plain.history, weighted.history);
    }

    #[test]
    fn evaluate_perfect_and_degenerate_predictors() {
        // as a proxy for a perfect predictor, evaluate on the train set of an
        // easily separable toy problem after enough epochs
        let data = synth::sentiment_corpus(16, 3);
        let mut cfg = toy_cfg(Architecture::BiLstm);
        cfg.max_epochs = 120;
        let model = toy_model(Architecture::BiLstm, 2);
        let outcome = train(&cfg, &model, &Encoder::CharMultiHot, &data, &data).unwrap();
        let report = evaluate(&model, &outcome.params, &Encoder::CharMultiHot, &data);
        assert!(report.accuracy > 0.9, "toy accuracy {}", report.accuracy);
        // an untrained model on zero input behaves like a constant predictor;
        // accuracy on a balanced set is 0.5
        let zeros = ModelParams::zeros(&model);
        let degenerate = evaluate(&model, &zeros, &Encoder::CharMultiHot, &data);
        assert!((degenerate.accuracy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_train_set_is_an_error() {
        let cfg = toy_cfg(Architecture::BiLstm);
        let model = toy_model(Architecture::BiLstm, 2);
        assert!(matches!(
            train(&cfg, &model, &Encoder::CharMultiHot, &[], &[]),
            Err(TrainError::EmptyTrainingSet)
        ));
    }
}
