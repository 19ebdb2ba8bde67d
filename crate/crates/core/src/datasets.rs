//! Benchmark corpus loaders, validation splitting and class weights.
//!
//! Two TSV layouts are supported: the sentiment corpus
//! (`id<TAB>document<TAB>label` with a header row, labels 0/1) and the
//! intention corpus (`label<TAB>text`, no header, labels 0..=6).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub text: String,
    pub label: usize,
}

impl LabeledExample {
    pub fn new(text: impl Into<String>, label: usize) -> Self {
        LabeledExample { text: text.into(), label }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: expected {expected} tab-separated columns, found {found}")]
    MissingColumn { path: String, line: usize, expected: usize, found: usize },
    #[error("{path}:{line}: label '{value}' is not an integer in [0,{classes})")]
    BadLabel { path: String, line: usize, value: String, classes: usize },
    #[error("class {class} has no examples")]
    EmptyClass { class: usize },
}

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io { path: path.display().to_string(), source }
}

fn parse_label(
    path: &Path,
    line: usize,
    value: &str,
    classes: usize,
) -> Result<usize, DatasetError> {
    match value.parse::<usize>() {
        Ok(l) if l < classes => Ok(l),
        _ => Err(DatasetError::BadLabel {
            path: path.display().to_string(),
            line,
            value: value.to_string(),
            classes,
        }),
    }
}

/// Load one sentiment-corpus file: header row skipped, then
/// `id<TAB>document<TAB>label` rows with binary labels. Empty documents are
/// kept as empty text.
pub fn load_nsmc_file(path: &Path) -> Result<Vec<LabeledExample>, DatasetError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if lineno == 0 {
            continue; // id<TAB>document<TAB>label header
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(DatasetError::MissingColumn {
                path: path.display().to_string(),
                line: lineno + 1,
                expected: 3,
                found: cols.len(),
            });
        }
        let label = parse_label(path, lineno + 1, cols[2], 2)?;
        out.push(LabeledExample::new(cols[1], label));
    }
    Ok(out)
}

/// Load the sentiment corpus train/test pair.
pub fn load_nsmc(
    train_file: &Path,
    test_file: &Path,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>), DatasetError> {
    Ok((load_nsmc_file(train_file)?, load_nsmc_file(test_file)?))
}

/// Load one intention-corpus file: `label<TAB>text` rows, seven classes,
/// no header.
pub fn load_3i4k_file(path: &Path) -> Result<Vec<LabeledExample>, DatasetError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.is_empty() {
            continue;
        }
        let Some((label, text)) = line.split_once('\t') else {
            return Err(DatasetError::MissingColumn {
                path: path.display().to_string(),
                line: lineno + 1,
                expected: 2,
                found: 1,
            });
        };
        let label = parse_label(path, lineno + 1, label, 7)?;
        out.push(LabeledExample::new(text, label));
    }
    Ok(out)
}

/// Load the intention corpus train/test pair.
pub fn load_3i4k(
    train_file: &Path,
    test_file: &Path,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>), DatasetError> {
    Ok((load_3i4k_file(train_file)?, load_3i4k_file(test_file)?))
}

/// Write examples in the sentiment-corpus layout (synthetic ids).
pub fn write_nsmc_file(path: &Path, examples: &[LabeledExample]) -> Result<(), DatasetError> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    writeln!(w, "id\tdocument\tlabel").map_err(|e| io_err(path, e))?;
    for (i, ex) in examples.iter().enumerate() {
        writeln!(w, "{}\t{}\t{}", i + 1, ex.text, ex.label).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// Write examples in the intention-corpus layout.
pub fn write_3i4k_file(path: &Path, examples: &[LabeledExample]) -> Result<(), DatasetError> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    for ex in examples {
        writeln!(w, "{}\t{}", ex.label, ex.text).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// Seeded 9:1 train/validation split.
#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub val_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        SplitSpec { val_fraction: 0.1, seed }
    }
}

/// Shuffle with the spec's seed, then split off `floor(val_fraction * N)`
/// examples for validation. Train and validation are disjoint and cover the
/// input.
pub fn split_validation(
    mut examples: Vec<LabeledExample>,
    spec: SplitSpec,
) -> (Vec<LabeledExample>, Vec<LabeledExample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    examples.shuffle(&mut rng);
    let n_val = (examples.len() as f64 * spec.val_fraction).floor() as usize;
    let val = examples.split_off(examples.len() - n_val);
    (examples, val)
}

/// Inverse-frequency class weights `N / (K * count_c)`; all ones on
/// balanced data.
pub fn class_weights(
    examples: &[LabeledExample],
    num_classes: usize,
) -> Result<Vec<f64>, DatasetError> {
    let mut counts = vec![0usize; num_classes];
    for ex in examples {
        counts[ex.label] += 1;
    }
    let total = examples.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(class, &c)| {
            if c == 0 {
                Err(DatasetError::EmptyClass { class })
            } else {
                Ok(total / (num_classes as f64 * c as f64))
            }
        })
        .collect()
}
