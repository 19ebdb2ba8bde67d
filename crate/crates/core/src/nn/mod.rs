//! From-scratch differentiable kernels: dense layers, LSTM, the
//! self-attentive head, dropout, softmax cross-entropy and Adam, with
//! exact parameter accounting and finite-difference gradient verification.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod init;
pub mod linalg;
pub mod lstm;
pub mod model;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use gradcheck::{grad_check, tiny_config, GradCheckReport};
pub use init::init_params;
pub use model::{backward, bilstm_last, forward, loss_weighted_xent, Tape};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use linalg::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    BiLstm,
    BiLstmSa,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::BiLstm => "bilstm",
            Architecture::BiLstmSa => "bilstm-sa",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bilstm" => Ok(Architecture::BiLstm),
            "bilstm-sa" => Ok(Architecture::BiLstmSa),
            other => Err(format!("unknown architecture '{other}' (expected bilstm|bilstm-sa)")),
        }
    }
}

/// Architecture hyperparameters.
///
/// The published widths are 32 hidden units per direction, a 128-wide head
/// for the plain model and, for the self-attentive model, 64-wide
/// projection/auxiliary layers, two 256-wide head layers and dropout 0.3.
/// All widths stay configurable so gradient checks can run on scaled-down
/// variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub arch: Architecture,
    pub input_dim: usize,
    pub seq_len: usize,
    pub num_classes: usize,
    /// LSTM width per direction.
    pub hidden: usize,
    /// Head width of the plain model.
    pub fc_width: usize,
    /// Width of the attention projection and the auxiliary branch.
    pub attn_dim: usize,
    /// Width of the two head layers of the self-attentive model.
    pub sa_fc_width: usize,
    /// Dropout rate (self-attentive model only).
    pub dropout: f64,
}

impl ModelConfig {
    pub fn bilstm(input_dim: usize, seq_len: usize, num_classes: usize) -> Self {
        ModelConfig {
            arch: Architecture::BiLstm,
            input_dim,
            seq_len,
            num_classes,
            hidden: 32,
            fc_width: 128,
            attn_dim: 64,
            sa_fc_width: 256,
            dropout: 0.0,
        }
    }

    pub fn bilstm_sa(input_dim: usize, seq_len: usize, num_classes: usize) -> Self {
        ModelConfig {
            arch: Architecture::BiLstmSa,
            input_dim,
            seq_len,
            num_classes,
            hidden: 32,
            fc_width: 128,
            attn_dim: 64,
            sa_fc_width: 256,
            dropout: 0.3,
        }
    }

    /// Closed-form trainable parameter count.
    ///
    /// Per direction the LSTM holds `4(h(D+h)+h)` scalars. The plain head
    /// adds `(2h·fc+fc) + (fc·N+N)`; the self-attentive head adds three
    /// `attn×attn`-sized layers (projection counts `attn×2h`), the `L×L`
    /// attention layer, the two wide head layers and the output layer.
    pub fn param_count(&self) -> usize {
        let h = self.hidden;
        let d = self.input_dim;
        let lstm = 2 * 4 * (h * (d + h) + h);
        match self.arch {
            Architecture::BiLstm => {
                let fc = self.fc_width;
                lstm + (2 * h * fc + fc) + (fc * self.num_classes + self.num_classes)
            }
            Architecture::BiLstmSa => {
                let a = self.attn_dim;
                let l = self.seq_len;
                let w = self.sa_fc_width;
                lstm + (2 * h * a + a)
                    + 2 * (a * a + a)
                    + (l * l + l)
                    + (2 * h * w + w)
                    + (w * w + w)
                    + (w * self.num_classes + self.num_classes)
            }
        }
    }

    /// Named parameter segments in storage order.
    pub fn layout(&self) -> Vec<Segment> {
        let h = self.hidden;
        let d = self.input_dim;
        let g = 4 * h;
        let mut segs = SegmentBuilder::default();
        for dir in ["fwd", "bwd"] {
            segs.push(format!("lstm.{dir}.w_x"), g, d);
            segs.push(format!("lstm.{dir}.w_h"), g, h);
            segs.push(format!("lstm.{dir}.b"), g, 1);
        }
        match self.arch {
            Architecture::BiLstm => {
                segs.push("fc.w".into(), self.fc_width, 2 * h);
                segs.push("fc.b".into(), self.fc_width, 1);
                segs.push("out.w".into(), self.num_classes, self.fc_width);
                segs.push("out.b".into(), self.num_classes, 1);
            }
            Architecture::BiLstmSa => {
                let a = self.attn_dim;
                let l = self.seq_len;
                let w = self.sa_fc_width;
                segs.push("sa.proj.w".into(), a, 2 * h);
                segs.push("sa.proj.b".into(), a, 1);
                segs.push("sa.aux1.w".into(), a, a);
                segs.push("sa.aux1.b".into(), a, 1);
                segs.push("sa.aux2.w".into(), a, a);
                segs.push("sa.aux2.b".into(), a, 1);
                segs.push("sa.attn.w".into(), l, l);
                segs.push("sa.attn.b".into(), l, 1);
                segs.push("sa.fc1.w".into(), w, 2 * h);
                segs.push("sa.fc1.b".into(), w, 1);
                segs.push("sa.fc2.w".into(), w, w);
                segs.push("sa.fc2.b".into(), w, 1);
                segs.push("out.w".into(), self.num_classes, w);
                segs.push("out.b".into(), self.num_classes, 1);
            }
        }
        segs.0
    }
}

/// One named parameter block: a `rows x cols` column-major matrix
/// (`cols = 1` for biases) at `offset` in the flat store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Default)]
struct SegmentBuilder(Vec<Segment>);

impl SegmentBuilder {
    fn push(&mut self, name: String, rows: usize, cols: usize) {
        let offset = self.0.last().map(|s| s.offset + s.len()).unwrap_or(0);
        self.0.push(Segment { name, rows, cols, offset });
    }
}

/// Named segments over a flat trainable-parameter store.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    segments: Vec<Segment>,
    values: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let segments = cfg.layout();
        let total: usize = segments.iter().map(Segment::len).sum();
        debug_assert_eq!(total, cfg.param_count(), "layout disagrees with the closed form");
        ModelParams { segments, values: vec![0.0; total] }
    }

    pub fn from_values(cfg: &ModelConfig, values: Vec<f64>) -> Self {
        let segments = cfg.layout();
        let total: usize = segments.iter().map(Segment::len).sum();
        assert_eq!(values.len(), total, "value count does not match the layout");
        ModelParams { segments, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }

    pub fn slice(&self, name: &str) -> &[f64] {
        let s = self.segment(name).unwrap_or_else(|| panic!("no segment '{name}'"));
        &self.values[s.offset..s.offset + s.len()]
    }

    pub fn slice_mut(&mut self, name: &str) -> &mut [f64] {
        let s = self
            .segment(name)
            .unwrap_or_else(|| panic!("no segment '{name}'"))
            .clone();
        &mut self.values[s.offset..s.offset + s.len()]
    }

    pub fn mat(&self, name: &str) -> Mat<'_> {
        let s = self.segment(name).unwrap_or_else(|| panic!("no segment '{name}'"));
        Mat::new(&self.values[s.offset..s.offset + s.len()], s.rows, s.cols)
    }
}

/// Convenience free function mirroring [`ModelConfig::param_count`].
pub fn param_count(cfg: &ModelConfig) -> usize {
    cfg.param_count()
}

#[cfg(test)]
mod tests {
    use super::*;

    // the ten published (scheme x architecture) configurations
    const BILSTM_CASES: [(usize, usize); 5] =
        [(67, 420), (118, 420), (2534, 140), (100, 140), (67, 140)];
    const BILSTM_EXPECTED: [usize; 5] = [34_178, 47_234, 665_730, 42_626, 34_178];
    const SA_EXPECTED: [usize; 5] = [297_846, 310_902, 772_318, 149_214, 140_766];

    #[test]
    fn bilstm_param_counts() {
        for ((d, l), expected) in BILSTM_CASES.iter().zip(BILSTM_EXPECTED) {
            let cfg = ModelConfig::bilstm(*d, *l, 2);
            assert_eq!(cfg.param_count(), expected, "D={d}");
        }
    }

    #[test]
    fn sa_param_counts() {
        for ((d, l), expected) in BILSTM_CASES.iter().zip(SA_EXPECTED) {
            let cfg = ModelConfig::bilstm_sa(*d, *l, 2);
            assert_eq!(cfg.param_count(), expected, "D={d} L={l}");
        }
    }

    #[test]
    fn sa_count_breakdown() {
        // 25,600 + 3*4,160 + 420*421 + 16,640 + 65,792 + 514
        let cfg = ModelConfig::bilstm_sa(67, 420, 2);
        assert_eq!(
            cfg.param_count(),
            25_600 + 3 * 4_160 + 420 * 421 + 16_640 + 65_792 + 514
        );
    }

    #[test]
    fn per_direction_lstm_count() {
        let cfg = ModelConfig::bilstm(67, 140, 2);
        let per_dir: usize = cfg
            .layout()
            .iter()
            .filter(|s| s.name.starts_with("lstm.fwd"))
            .map(Segment::len)
            .sum();
        assert_eq!(per_dir, 12_800); // 4 * (32*(67+32) + 32)
    }

    #[test]
    fn layout_matches_closed_form() {
        for cfg in [
            ModelConfig::bilstm(5, 7, 3),
            ModelConfig::bilstm_sa(5, 7, 3),
            ModelConfig::bilstm(2534, 140, 7),
            ModelConfig::bilstm_sa(100, 80, 7),
        ] {
            let total: usize = cfg.layout().iter().map(Segment::len).sum();
            assert_eq!(total, cfg.param_count());
        }
    }

    #[test]
    fn segments_are_contiguous() {
        let cfg = ModelConfig::bilstm_sa(10, 12, 4);
        let segs = cfg.layout();
        let mut expected_offset = 0;
        for s in &segs {
            assert_eq!(s.offset, expected_offset, "{}", s.name);
            expected_offset += s.len();
        }
        let p = ModelParams::zeros(&cfg);
        assert_eq!(p.len(), expected_offset);
        assert_eq!(p.slice("sa.attn.b").len(), 12);
        assert_eq!(p.mat("sa.attn.w").cols(), 12);
    }
}
