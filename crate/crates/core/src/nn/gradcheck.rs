//! Analytic gradients vs central finite differences.
//!
//! The check runs on scaled-down configurations with dropout disabled,
//! fully random parameters (so no ReLU pre-activation sits on its kink)
//! and an input that mixes zero, sparse and dense rows to cover every
//! input path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use crate::featurizer::FeatureRow;

use super::model::{backward, forward, loss_weighted_xent};
use super::{Architecture, ModelConfig, ModelParams};

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub checked: usize,
    pub worst_segment: String,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
}

/// Scaled-down configuration for finite-difference verification.
pub fn tiny_config(arch: Architecture) -> ModelConfig {
    match arch {
        Architecture::BiLstm => ModelConfig {
            arch,
            input_dim: 5,
            seq_len: 7,
            num_classes: 3,
            hidden: 2,
            fc_width: 4,
            attn_dim: 3,
            sa_fc_width: 5,
            dropout: 0.0,
        },
        Architecture::BiLstmSa => ModelConfig {
            arch,
            input_dim: 5,
            seq_len: 7,
            num_classes: 3,
            hidden: 2,
            fc_width: 4,
            attn_dim: 3,
            sa_fc_width: 5,
            dropout: 0.0,
        },
    }
}

fn check_input(dim: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<FeatureRow> {
    (0..len)
        .map(|i| {
            if i == 0 {
                FeatureRow::Zero
            } else if i == 1 {
                FeatureRow::Ones(vec![0, dim as u32 - 1])
            } else {
                FeatureRow::Dense(Arc::from(
                    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>(),
                ))
            }
        })
        .collect()
}

const FD_STEP: f64 = 1e-4;
/// Relative error with an absolute floor so finite-difference noise on
/// near-zero components cannot dominate the report.
const REL_FLOOR: f64 = 1e-3;

/// Compare reverse-mode gradients against central finite differences
/// (step 1e-4) for every parameter of `cfg`.
pub fn grad_check(cfg: &ModelConfig, seed: u64) -> GradCheckReport {
    assert_eq!(cfg.dropout, 0.0, "gradient checks require dropout off");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ModelParams::zeros(cfg);
    for x in params.values_mut() {
        *x = rng.gen_range(-0.5..0.5);
    }
    let rows = check_input(cfg.input_dim, cfg.seq_len, &mut rng);
    let label = 1 % cfg.num_classes;
    let weight = 1.3;

    let tape = forward(cfg, &params, &rows, None);
    let mut analytic = vec![0.0; params.len()];
    backward(cfg, &params, &rows, &tape, label, weight, &mut analytic);

    let loss_at = |values: &[f64]| {
        let p = ModelParams::from_values(cfg, values.to_vec());
        let t = forward(cfg, &p, &rows, None);
        loss_weighted_xent(t.probs(), label, weight)
    };

    let mut values = params.values().to_vec();
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        checked: values.len(),
        worst_segment: String::new(),
        worst_analytic: 0.0,
        worst_numeric: 0.0,
    };
    for i in 0..values.len() {
        let orig = values[i];
        values[i] = orig + FD_STEP;
        let plus = loss_at(&values);
        values[i] = orig - FD_STEP;
        let minus = loss_at(&values);
        values[i] = orig;
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let a = analytic[i];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(REL_FLOOR);
        if rel > report.max_rel_err {
            report.max_rel_err = rel;
            report.worst_segment = params
                .segments()
                .iter()
                .find(|s| i >= s.offset && i < s.offset + s.len())
                .map(|s| s.name.clone())
                .unwrap_or_default();
            report.worst_analytic = a;
            report.worst_numeric = numeric;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilstm_gradients_match_finite_differences() {
        let cfg = tiny_config(Architecture::BiLstm);
        let report = grad_check(&cfg, 17);
        assert!(
            report.max_rel_err < 1e-4,
            "max rel err {} at {} (analytic {}, numeric {})",
            report.max_rel_err,
            report.worst_segment,
            report.worst_analytic,
            report.worst_numeric
        );
    }

    #[test]
    fn sa_gradients_match_finite_differences() {
        let cfg = tiny_config(Architecture::BiLstmSa);
        let report = grad_check(&cfg, 23);
        assert!(
            report.max_rel_err < 1e-4,
            "max rel err {} at {} (analytic {}, numeric {})",
            report.max_rel_err,
            report.worst_segment,
            report.worst_analytic,
            report.worst_numeric
        );
    }
}
