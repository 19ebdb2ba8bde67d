//! Self-describing model checkpoints.
//!
//! JSON container with the configuration, seed, featurization context and
//! the named segments over the raw values. serde_json prints shortest
//! round-tripping decimals, so save/load reproduces every f64 exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ModelConfig, ModelParams, Segment};

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: serde_json::Error },
    #[error("checkpoint values ({got}) do not match the configuration ({expected})")]
    SizeMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: u32,
    pub seed: u64,
    /// Featurization context, present when saved by the trainer.
    pub task: Option<String>,
    pub scheme: Option<String>,
    pub max_len: Option<usize>,
    pub config: ModelConfig,
    pub segments: Vec<Segment>,
    pub values: Vec<f64>,
}

impl Checkpoint {
    pub const FORMAT: u32 = 1;

    pub fn new(config: ModelConfig, params: &ModelParams, seed: u64) -> Self {
        Checkpoint {
            format: Self::FORMAT,
            seed,
            task: None,
            scheme: None,
            max_len: None,
            config,
            segments: params.segments().to_vec(),
            values: params.values().to_vec(),
        }
    }

    pub fn params(&self) -> Result<ModelParams, CheckpointError> {
        if self.values.len() != self.config.param_count() {
            return Err(CheckpointError::SizeMismatch {
                got: self.values.len(),
                expected: self.config.param_count(),
            });
        }
        Ok(ModelParams::from_values(&self.config, self.values.clone()))
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let file = File::create(path).map_err(|e| CheckpointError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::to_writer(BufWriter::new(file), self).map_err(|e| CheckpointError::Format {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let file = File::open(path).map_err(|e| CheckpointError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| CheckpointError::Format {
            path: path.display().to_string(),
            source: e,
        })
    }
}
