//! Full forward and reverse-mode backward passes for both architectures.
//!
//! Plain model: BiLSTM final states → ReLU dense head → softmax.
//!
//! Self-attentive model: the full BiLSTM hidden sequence `H` (L x 2h) is
//! projected per step through a tanh layer; a zero-input auxiliary branch
//! (two ReLU layers, so it degenerates to learned biases but keeps its
//! parameters) yields a vector that is dot-multiplied against each
//! projection to score the steps; the scores pass through a dense `L -> L`
//! layer with softmax to form the attention weights; the attention-weighted
//! sum of `H` feeds two wide ReLU layers with dropout and the softmax
//! output.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::featurizer::FeatureRow;

use super::linalg::{axpy, dot, softmax_backward, softmax_in_place, Mat};
use super::lstm::{lstm_backward, lstm_forward, LstmCache};
use super::{Architecture, ModelConfig, ModelParams};

/// Weighted categorical cross-entropy of one prediction.
pub fn loss_weighted_xent(probs: &[f64], label: usize, weight: f64) -> f64 {
    -weight * probs[label].max(1e-300).ln()
}

fn dense(w: Mat<'_>, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = b.to_vec();
    w.matvec_acc(x, &mut out);
    out
}

fn relu_in_place(v: &mut [f64]) {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Inverted-scaling dropout mask: kept units carry `1/keep` so evaluation
/// needs no rescaling.
fn dropout_mask(rng: &mut ChaCha8Rng, len: usize, rate: f64) -> Vec<f64> {
    let keep = 1.0 - rate;
    (0..len).map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect()
}

fn apply_mask(v: &[f64], mask: &Option<Vec<f64>>) -> Vec<f64> {
    match mask {
        Some(m) => v.iter().zip(m).map(|(x, k)| x * k).collect(),
        None => v.to_vec(),
    }
}

/// Forward intermediates for exact reverse-mode differentiation.
pub enum Tape {
    Plain(PlainTape),
    Sa(SaTape),
}

pub struct PlainTape {
    fwd: LstmCache,
    bwd: LstmCache,
    last: Vec<f64>,
    fc_act: Vec<f64>,
    probs: Vec<f64>,
}

pub struct SaTape {
    fwd: LstmCache,
    bwd: LstmCache,
    /// Aligned hidden sequence, L x 2h.
    hseq: Vec<f64>,
    /// Per-step tanh projections, L x attn_dim.
    proj_a: Vec<f64>,
    aux1_act: Vec<f64>,
    aux1_dropped: Vec<f64>,
    aux_b: Vec<f64>,
    scores: Vec<f64>,
    attention: Vec<f64>,
    context: Vec<f64>,
    fc1_act: Vec<f64>,
    fc1_dropped: Vec<f64>,
    fc2_act: Vec<f64>,
    fc2_dropped: Vec<f64>,
    mask_aux: Option<Vec<f64>>,
    mask1: Option<Vec<f64>>,
    mask2: Option<Vec<f64>>,
    probs: Vec<f64>,
}

impl Tape {
    pub fn probs(&self) -> &[f64] {
        match self {
            Tape::Plain(t) => &t.probs,
            Tape::Sa(t) => &t.probs,
        }
    }

    /// Attention weights over the L positions (self-attentive model only).
    pub fn attention(&self) -> Option<&[f64]> {
        match self {
            Tape::Plain(_) => None,
            Tape::Sa(t) => Some(&t.attention),
        }
    }
}

fn run_lstm(params: &ModelParams, dir: &str, rows: &[FeatureRow], hidden: usize) -> LstmCache {
    lstm_forward(
        rows,
        dir == "bwd",
        params.mat(&format!("lstm.{dir}.w_x")),
        params.mat(&format!("lstm.{dir}.w_h")),
        params.slice(&format!("lstm.{dir}.b")),
        hidden,
    )
}

/// Concatenation of the forward direction's final hidden state with the
/// backward direction's final state (the backward run processes the
/// reversed sequence).
pub fn bilstm_last(cfg: &ModelConfig, params: &ModelParams, rows: &[FeatureRow]) -> Vec<f64> {
    let fwd = run_lstm(params, "fwd", rows, cfg.hidden);
    let bwd = run_lstm(params, "bwd", rows, cfg.hidden);
    let mut out = Vec::with_capacity(2 * cfg.hidden);
    out.extend_from_slice(fwd.h_final());
    out.extend_from_slice(bwd.h_final());
    out
}

/// Run the model on one featurized sequence. `dropout_rng` enables training
/// mode; pass `None` for deterministic evaluation.
pub fn forward(
    cfg: &ModelConfig,
    params: &ModelParams,
    rows: &[FeatureRow],
    dropout_rng: Option<&mut ChaCha8Rng>,
) -> Tape {
    debug_assert_eq!(rows.len(), cfg.seq_len);
    match cfg.arch {
        Architecture::BiLstm => Tape::Plain(forward_plain(cfg, params, rows)),
        Architecture::BiLstmSa => Tape::Sa(forward_sa(cfg, params, rows, dropout_rng)),
    }
}

fn forward_plain(cfg: &ModelConfig, params: &ModelParams, rows: &[FeatureRow]) -> PlainTape {
    let fwd = run_lstm(params, "fwd", rows, cfg.hidden);
    let bwd = run_lstm(params, "bwd", rows, cfg.hidden);
    let mut last = Vec::with_capacity(2 * cfg.hidden);
    last.extend_from_slice(fwd.h_final());
    last.extend_from_slice(bwd.h_final());

    let mut fc_act = dense(params.mat("fc.w"), params.slice("fc.b"), &last);
    relu_in_place(&mut fc_act);
    let mut probs = dense(params.mat("out.w"), params.slice("out.b"), &fc_act);
    softmax_in_place(&mut probs);
    PlainTape { fwd, bwd, last, fc_act, probs }
}

fn forward_sa(
    cfg: &ModelConfig,
    params: &ModelParams,
    rows: &[FeatureRow],
    dropout_rng: Option<&mut ChaCha8Rng>,
) -> SaTape {
    let h = cfg.hidden;
    let len = cfg.seq_len;
    let a_dim = cfg.attn_dim;
    let fwd = run_lstm(params, "fwd", rows, h);
    let bwd = run_lstm(params, "bwd", rows, h);

    // aligned hidden sequence: position t pairs the forward state at t with
    // the backward state computed at processing step L-1-t
    let mut hseq = vec![0.0; len * 2 * h];
    for t in 0..len {
        hseq[t * 2 * h..t * 2 * h + h].copy_from_slice(fwd.h_at(t));
        hseq[t * 2 * h + h..(t + 1) * 2 * h].copy_from_slice(bwd.h_at(len - 1 - t));
    }

    let proj_w = params.mat("sa.proj.w");
    let proj_b = params.slice("sa.proj.b");
    let mut proj_a = vec![0.0; len * a_dim];
    for t in 0..len {
        let ht = &hseq[t * 2 * h..(t + 1) * 2 * h];
        let mut at = dense(proj_w, proj_b, ht);
        for x in at.iter_mut() {
            *x = x.tanh();
        }
        proj_a[t * a_dim..(t + 1) * a_dim].copy_from_slice(&at);
    }

    // auxiliary branch over a zero input: the first layer reduces to its bias
    let rate = cfg.dropout;
    let mut rng = dropout_rng;
    let train = rng.is_some() && rate > 0.0;
    let mut aux1_act = params.slice("sa.aux1.b").to_vec();
    relu_in_place(&mut aux1_act);
    let mask_aux = if train {
        Some(dropout_mask(rng.as_deref_mut().unwrap(), a_dim, rate))
    } else {
        None
    };
    let aux1_dropped = apply_mask(&aux1_act, &mask_aux);
    let mut aux_b = dense(params.mat("sa.aux2.w"), params.slice("sa.aux2.b"), &aux1_dropped);
    relu_in_place(&mut aux_b);

    let scores: Vec<f64> =
        (0..len).map(|t| dot(&proj_a[t * a_dim..(t + 1) * a_dim], &aux_b)).collect();

    let mut attention = dense(params.mat("sa.attn.w"), params.slice("sa.attn.b"), &scores);
    softmax_in_place(&mut attention);

    let mut context = vec![0.0; 2 * h];
    for t in 0..len {
        axpy(attention[t], &hseq[t * 2 * h..(t + 1) * 2 * h], &mut context);
    }

    let mut fc1_act = dense(params.mat("sa.fc1.w"), params.slice("sa.fc1.b"), &context);
    relu_in_place(&mut fc1_act);
    let mask1 = if train {
        Some(dropout_mask(rng.as_deref_mut().unwrap(), cfg.sa_fc_width, rate))
    } else {
        None
    };
    let fc1_dropped = apply_mask(&fc1_act, &mask1);

    let mut fc2_act = dense(params.mat("sa.fc2.w"), params.slice("sa.fc2.b"), &fc1_dropped);
    relu_in_place(&mut fc2_act);
    let mask2 = if train {
        Some(dropout_mask(rng.as_deref_mut().unwrap(), cfg.sa_fc_width, rate))
    } else {
        None
    };
    let fc2_dropped = apply_mask(&fc2_act, &mask2);

    let mut probs = dense(params.mat("out.w"), params.slice("out.b"), &fc2_dropped);
    softmax_in_place(&mut probs);

    SaTape {
        fwd,
        bwd,
        hseq,
        proj_a,
        aux1_act,
        aux1_dropped,
        aux_b,
        scores,
        attention,
        context,
        fc1_act,
        fc1_dropped,
        fc2_act,
        fc2_dropped,
        mask_aux,
        mask1,
        mask2,
        probs,
    }
}

struct GradStore<'a> {
    segments: Vec<super::Segment>,
    values: &'a mut [f64],
}

impl<'a> GradStore<'a> {
    fn new(cfg: &ModelConfig, values: &'a mut [f64]) -> Self {
        let segments = cfg.layout();
        let total: usize = segments.iter().map(|s| s.len()).sum();
        assert_eq!(values.len(), total, "gradient store size mismatch");
        GradStore { segments, values }
    }

    fn slice_mut(&mut self, name: &str) -> &mut [f64] {
        let s = self
            .segments
            .iter()
            .find(|s| s.name == name)
            .unwrap_or_else(|| panic!("no segment '{name}'"));
        &mut self.values[s.offset..s.offset + s.len()]
    }
}

/// Dense-layer backward: accumulates the layer's weight/bias gradients in
/// the store and returns the gradient on its input.
fn dense_backward(
    store: &mut GradStore<'_>,
    params: &ModelParams,
    name: &str,
    x: &[f64],
    dz: &[f64],
) -> Vec<f64> {
    let w_name = format!("{name}.w");
    super::linalg::acc_outer(store.slice_mut(&w_name), dz.len(), dz, x);
    axpy(1.0, dz, store.slice_mut(&format!("{name}.b")));
    let mut dx = vec![0.0; x.len()];
    params.mat(&w_name).matvec_t_acc(dz, &mut dx);
    dx
}

fn relu_backward_in_place(d: &mut [f64], act: &[f64]) {
    for (g, &a) in d.iter_mut().zip(act) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}

fn mask_backward_in_place(d: &mut [f64], mask: &Option<Vec<f64>>) {
    if let Some(m) = mask {
        for (g, &k) in d.iter_mut().zip(m) {
            *g *= k;
        }
    }
}

/// Accumulate the gradients of the weighted cross-entropy of one example
/// into `grads` (flat, congruent with the parameter layout).
pub fn backward(
    cfg: &ModelConfig,
    params: &ModelParams,
    rows: &[FeatureRow],
    tape: &Tape,
    label: usize,
    weight: f64,
    grads: &mut [f64],
) {
    // softmax + cross-entropy fuse to w * (p - onehot(label))
    let mut dlogits = tape.probs().to_vec();
    dlogits[label] -= 1.0;
    for d in dlogits.iter_mut() {
        *d *= weight;
    }
    let mut store = GradStore::new(cfg, grads);
    match (cfg.arch, tape) {
        (Architecture::BiLstm, Tape::Plain(t)) => {
            backward_plain(cfg, params, rows, t, &dlogits, &mut store)
        }
        (Architecture::BiLstmSa, Tape::Sa(t)) => {
            backward_sa(cfg, params, rows, t, &dlogits, &mut store)
        }
        _ => panic!("tape does not match the architecture"),
    }
}

fn lstm_grads_backward(
    params: &ModelParams,
    dir: &str,
    rows: &[FeatureRow],
    cache: &LstmCache,
    dh_seq: Option<&[f64]>,
    dh_final: Option<&[f64]>,
    store: &mut GradStore<'_>,
) {
    // split-borrow the three gradient segments out of the flat store
    let (wx_seg, wh_seg, b_seg) = (
        store.segments.iter().find(|s| s.name == format!("lstm.{dir}.w_x")).unwrap().clone(),
        store.segments.iter().find(|s| s.name == format!("lstm.{dir}.w_h")).unwrap().clone(),
        store.segments.iter().find(|s| s.name == format!("lstm.{dir}.b")).unwrap().clone(),
    );
    debug_assert_eq!(wx_seg.offset + wx_seg.len(), wh_seg.offset);
    debug_assert_eq!(wh_seg.offset + wh_seg.len(), b_seg.offset);
    let region = &mut store.values[wx_seg.offset..b_seg.offset + b_seg.len()];
    let (gw_x, rest) = region.split_at_mut(wx_seg.len());
    let (gw_h, gb) = rest.split_at_mut(wh_seg.len());
    lstm_backward(
        rows,
        dir == "bwd",
        params.mat(&format!("lstm.{dir}.w_h")),
        cache,
        dh_seq,
        dh_final,
        gw_x,
        gw_h,
        gb,
    );
}

fn backward_plain(
    cfg: &ModelConfig,
    params: &ModelParams,
    rows: &[FeatureRow],
    t: &PlainTape,
    dlogits: &[f64],
    store: &mut GradStore<'_>,
) {
    let h = cfg.hidden;
    let mut dfc = dense_backward(store, params, "out", &t.fc_act, dlogits);
    relu_backward_in_place(&mut dfc, &t.fc_act);
    let dlast = dense_backward(store, params, "fc", &t.last, &dfc);

    lstm_grads_backward(params, "fwd", rows, &t.fwd, None, Some(&dlast[..h]), store);
    lstm_grads_backward(params, "bwd", rows, &t.bwd, None, Some(&dlast[h..]), store);
}

fn backward_sa(
    cfg: &ModelConfig,
    params: &ModelParams,
    rows: &[FeatureRow],
    t: &SaTape,
    dlogits: &[f64],
    store: &mut GradStore<'_>,
) {
    let h = cfg.hidden;
    let len = cfg.seq_len;
    let a_dim = cfg.attn_dim;

    // head layers, top to bottom
    let mut dfc2 = dense_backward(store, params, "out", &t.fc2_dropped, dlogits);
    mask_backward_in_place(&mut dfc2, &t.mask2);
    relu_backward_in_place(&mut dfc2, &t.fc2_act);

    let mut dfc1 = dense_backward(store, params, "sa.fc2", &t.fc1_dropped, &dfc2);
    mask_backward_in_place(&mut dfc1, &t.mask1);
    relu_backward_in_place(&mut dfc1, &t.fc1_act);

    let dcontext = dense_backward(store, params, "sa.fc1", &t.context, &dfc1);

    // context = sum_t attention_t H_t
    let mut dh_seq_pos = vec![0.0; len * 2 * h];
    let mut dattention = vec![0.0; len];
    for t_pos in 0..len {
        let ht = &t.hseq[t_pos * 2 * h..(t_pos + 1) * 2 * h];
        dattention[t_pos] = dot(&dcontext, ht);
        axpy(t.attention[t_pos], &dcontext, &mut dh_seq_pos[t_pos * 2 * h..(t_pos + 1) * 2 * h]);
    }

    // attention softmax and the L -> L dense layer
    let mut dattn_z = vec![0.0; len];
    softmax_backward(&t.attention, &dattention, &mut dattn_z);
    let dscores = dense_backward(store, params, "sa.attn", &t.scores, &dattn_z);

    // scores_t = proj_a_t . aux_b
    let mut daux_b = vec![0.0; a_dim];
    for t_pos in 0..len {
        axpy(dscores[t_pos], &t.proj_a[t_pos * a_dim..(t_pos + 1) * a_dim], &mut daux_b);
    }

    // auxiliary branch; its first weight matrix sees a zero input, so only
    // bias gradients flow there
    relu_backward_in_place(&mut daux_b, &t.aux_b);
    let mut daux1 = dense_backward(store, params, "sa.aux2", &t.aux1_dropped, &daux_b);
    mask_backward_in_place(&mut daux1, &t.mask_aux);
    relu_backward_in_place(&mut daux1, &t.aux1_act);
    axpy(1.0, &daux1, store.slice_mut("sa.aux1.b"));

    // per-step tanh projection
    let proj_w = params.mat("sa.proj.w");
    let mut dzp = vec![0.0; a_dim];
    for t_pos in 0..len {
        let at = &t.proj_a[t_pos * a_dim..(t_pos + 1) * a_dim];
        for k in 0..a_dim {
            dzp[k] = dscores[t_pos] * t.aux_b[k] * (1.0 - at[k] * at[k]);
        }
        let ht = &t.hseq[t_pos * 2 * h..(t_pos + 1) * 2 * h];
        super::linalg::acc_outer(store.slice_mut("sa.proj.w"), a_dim, &dzp, ht);
        axpy(1.0, &dzp, store.slice_mut("sa.proj.b"));
        proj_w.matvec_t_acc(&dzp, &mut dh_seq_pos[t_pos * 2 * h..(t_pos + 1) * 2 * h]);
    }

    // split positional dH into per-direction sequences in processing order
    let mut dh_fwd = vec![0.0; len * h];
    let mut dh_bwd = vec![0.0; len * h];
    for t_pos in 0..len {
        dh_fwd[t_pos * h..(t_pos + 1) * h]
            .copy_from_slice(&dh_seq_pos[t_pos * 2 * h..t_pos * 2 * h + h]);
        let s = len - 1 - t_pos;
        dh_bwd[s * h..(s + 1) * h]
            .copy_from_slice(&dh_seq_pos[t_pos * 2 * h + h..(t_pos + 1) * 2 * h]);
    }
    lstm_grads_backward(params, "fwd", rows, &t.fwd, Some(&dh_fwd), None, store);
    lstm_grads_backward(params, "bwd", rows, &t.bwd, Some(&dh_bwd), None, store);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init::init_params;
    use rand::SeedableRng;
    use std::sync::Arc;

    fn random_rows(dim: usize, len: usize, seed: u64) -> Vec<FeatureRow> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
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

    #[test]
    fn plain_probs_form_a_simplex() {
        let cfg = ModelConfig::bilstm(6, 5, 4);
        let params = init_params(&cfg, 3);
        let rows = random_rows(6, 5, 9);
        let tape = forward(&cfg, &params, &rows, None);
        let sum: f64 = tape.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(tape.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn zero_logits_give_uniform_probs() {
        let cfg = ModelConfig::bilstm(4, 3, 2);
        let params = ModelParams::zeros(&cfg);
        let rows = random_rows(4, 3, 1);
        let tape = forward(&cfg, &params, &rows, None);
        assert_eq!(tape.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn zero_input_zero_params_give_zero_last_state() {
        let cfg = ModelConfig::bilstm(4, 3, 2);
        let params = ModelParams::zeros(&cfg);
        let rows = vec![FeatureRow::Zero; 3];
        let last = bilstm_last(&cfg, &params, &rows);
        assert_eq!(last, vec![0.0; 64.min(2 * cfg.hidden)]);
        assert_eq!(last.len(), 2 * cfg.hidden);
    }

    #[test]
    fn published_width_gives_64_dim_last_state() {
        let cfg = ModelConfig::bilstm(67, 10, 2);
        let params = init_params(&cfg, 5);
        let rows = random_rows(67, 10, 2);
        assert_eq!(bilstm_last(&cfg, &params, &rows).len(), 64);
    }

    #[test]
    fn reversing_input_and_swapping_directions_swaps_halves() {
        let cfg = ModelConfig::bilstm(5, 6, 2);
        let params = init_params(&cfg, 11);
        let rows = random_rows(5, 6, 4);
        let mut flipped_rows = rows.clone();
        flipped_rows.reverse();

        // swap the two directions' parameter blocks
        let mut swapped = params.clone();
        for seg in ["w_x", "w_h", "b"] {
            let f = params.slice(&format!("lstm.fwd.{seg}")).to_vec();
            let b = params.slice(&format!("lstm.bwd.{seg}")).to_vec();
            swapped.slice_mut(&format!("lstm.fwd.{seg}")).copy_from_slice(&b);
            swapped.slice_mut(&format!("lstm.bwd.{seg}")).copy_from_slice(&f);
        }

        let h = cfg.hidden;
        let original = bilstm_last(&cfg, &params, &rows);
        let mirrored = bilstm_last(&cfg, &swapped, &flipped_rows);
        for k in 0..h {
            assert!((original[k] - mirrored[h + k]).abs() < 1e-15);
            assert!((original[h + k] - mirrored[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn sa_attention_is_a_simplex() {
        let cfg = ModelConfig::bilstm_sa(6, 9, 3);
        let params = init_params(&cfg, 7);
        let rows = random_rows(6, 9, 8);
        let tape = forward(&cfg, &params, &rows, None);
        let attn = tape.attention().unwrap();
        assert_eq!(attn.len(), 9);
        let sum: f64 = attn.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(attn.iter().all(|&a| a >= 0.0));
        let psum: f64 = tape.probs().iter().sum();
        assert!((psum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eval_mode_is_deterministic_and_dropout_free() {
        let cfg = ModelConfig::bilstm_sa(5, 7, 2);
        let params = init_params(&cfg, 2);
        let rows = random_rows(5, 7, 3);
        let a = forward(&cfg, &params, &rows, None);
        let b = forward(&cfg, &params, &rows, None);
        assert_eq!(a.probs(), b.probs());
        // training mode with rate 0 reproduces evaluation exactly
        let mut cfg0 = cfg;
        cfg0.dropout = 0.0;
        let params0 = init_params(&cfg0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = forward(&cfg0, &params0, &rows, Some(&mut rng));
        let d = forward(&cfg0, &params0, &rows, None);
        assert_eq!(c.probs(), d.probs());
    }

    #[test]
    fn training_mode_dropout_is_seeded() {
        let cfg = ModelConfig::bilstm_sa(5, 7, 2);
        let params = init_params(&cfg, 2);
        let rows = random_rows(5, 7, 3);
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        let a = forward(&cfg, &params, &rows, Some(&mut r1));
        let b = forward(&cfg, &params, &rows, Some(&mut r2));
        assert_eq!(a.probs(), b.probs());
    }

    #[test]
    fn loss_examples() {
        assert_eq!(loss_weighted_xent(&[1.0, 0.0], 0, 1.0), 0.0);
        let l = loss_weighted_xent(&[0.5, 0.5], 1, 2.0);
        assert!((l - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
    }
}
