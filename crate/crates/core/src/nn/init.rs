//! Seeded parameter initialization.
//!
//! Input and dense kernels draw from the fan-scaled uniform distribution,
//! recurrent kernels get orthonormal columns, biases start at zero except
//! the LSTM forget-gate block, which starts at one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::linalg::{axpy, dot};
use super::{ModelConfig, ModelParams};

fn glorot_uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, out: &mut [f64]) {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    for x in out.iter_mut() {
        *x = rng.gen_range(-limit..limit);
    }
}

/// Fill a column-major `rows x cols` block (`rows >= cols`) with orthonormal
/// columns via twice-iterated Gram-Schmidt on a Gaussian draw.
fn orthogonal_columns(rng: &mut ChaCha8Rng, rows: usize, cols: usize, out: &mut [f64]) {
    assert!(rows >= cols, "orthogonal init expects a tall matrix");
    for x in out.iter_mut() {
        *x = StandardNormal.sample(rng);
    }
    for _ in 0..2 {
        for c in 0..cols {
            let (done, rest) = out.split_at_mut(c * rows);
            let col = &mut rest[..rows];
            for p in 0..c {
                let prev = &done[p * rows..(p + 1) * rows];
                let proj = dot(col, prev);
                axpy(-proj, prev, col);
            }
            let norm = dot(col, col).sqrt();
            assert!(norm > 1e-12, "degenerate Gaussian draw");
            for x in col.iter_mut() {
                *x /= norm;
            }
        }
    }
}

/// Deterministic parameter initialization for a configuration.
pub fn init_params(cfg: &ModelConfig, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ModelParams::zeros(cfg);
    let h = cfg.hidden;
    let segments = params.segments().to_vec();
    for seg in &segments {
        let (rows, cols) = (seg.rows, seg.cols);
        let values = params.slice_mut(&seg.name);
        if seg.name.ends_with(".w_h") {
            orthogonal_columns(&mut rng, rows, cols, values);
        } else if seg.name.ends_with(".w_x") || seg.name.ends_with(".w") {
            glorot_uniform(&mut rng, rows, cols, values);
        } else if seg.name.starts_with("lstm.") && seg.name.ends_with(".b") {
            values[h..2 * h].fill(1.0); // forget gate block
        }
        // all other biases stay zero
    }
    params
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Architecture;

    #[test]
    fn deterministic_under_seed() {
        let cfg = ModelConfig::bilstm_sa(7, 9, 3);
        let a = init_params(&cfg, 42);
        let b = init_params(&cfg, 42);
        assert_eq!(a.values(), b.values());
        let c = init_params(&cfg, 43);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn count_matches_config() {
        for cfg in [ModelConfig::bilstm(67, 140, 2), ModelConfig::bilstm_sa(100, 140, 7)] {
            let p = init_params(&cfg, 0);
            assert_eq!(p.len(), cfg.param_count());
        }
    }

    #[test]
    fn recurrent_kernels_are_orthogonal() {
        let cfg = ModelConfig::bilstm(10, 5, 2);
        let p = init_params(&cfg, 1);
        for dir in ["fwd", "bwd"] {
            let m = p.mat(&format!("lstm.{dir}.w_h"));
            for a in 0..m.cols() {
                for b in 0..m.cols() {
                    let expected = if a == b { 1.0 } else { 0.0 };
                    let got = dot(m.col(a), m.col(b));
                    assert!(
                        (got - expected).abs() < 1e-6,
                        "{dir} Q^T Q [{a},{b}] = {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn forget_gate_bias_is_one() {
        let cfg = ModelConfig::bilstm(4, 3, 2);
        let p = init_params(&cfg, 9);
        let h = cfg.hidden;
        let b = p.slice("lstm.fwd.b");
        assert!(b[..h].iter().all(|&x| x == 0.0));
        assert!(b[h..2 * h].iter().all(|&x| x == 1.0));
        assert!(b[2 * h..].iter().all(|&x| x == 0.0));
        // head biases are zero
        assert!(p.slice("fc.b").iter().all(|&x| x == 0.0));
        assert_eq!(cfg.arch, Architecture::BiLstm);
    }
}
