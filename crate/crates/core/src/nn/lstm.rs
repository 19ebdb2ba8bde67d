//! Single-direction LSTM forward pass and backward-through-time.
//!
//! Gate layout within the stacked `4h` block is `[input, forget, cell,
//! output]`. The recurrence is
//!
//! ```text
//! z_t = W_x x_t + W_h h_{t-1} + b
//! i, f, o = sigmoid(z_i, z_f, z_o);  g = tanh(z_g)
//! c_t = f ∘ c_{t-1} + i ∘ g;  h_t = o ∘ tanh(c_t)
//! ```
//!
//! Padding rows are processed as genuine zero inputs: no masking, the
//! input-side product is simply skipped for all-zero rows.

use crate::featurizer::FeatureRow;

use super::linalg::{axpy, dot, sigmoid, Mat};

/// Forward intermediates of one direction, in processing order.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub hidden: usize,
    /// `L x 4h` post-activation gates `[i f g o]` per step.
    pub gates: Vec<f64>,
    /// `L x h` cell states.
    pub c: Vec<f64>,
    /// `L x h` tanh of the cell states.
    pub tanh_c: Vec<f64>,
    /// `L x h` hidden states.
    pub h: Vec<f64>,
}

impl LstmCache {
    /// Hidden state after processing step `s`.
    pub fn h_at(&self, s: usize) -> &[f64] {
        &self.h[s * self.hidden..(s + 1) * self.hidden]
    }

    /// Final hidden state of the run.
    pub fn h_final(&self) -> &[f64] {
        let steps = self.h.len() / self.hidden;
        self.h_at(steps - 1)
    }
}

fn add_input_product(w_x: Mat<'_>, row: &FeatureRow, z: &mut [f64]) {
    match row {
        FeatureRow::Zero => {}
        FeatureRow::Ones(idx) => {
            for &i in idx {
                axpy(1.0, w_x.col(i as usize), z);
            }
        }
        FeatureRow::Dense(v) => w_x.matvec_acc(v, z),
    }
}

/// Run one direction over `rows`. With `reversed` the sequence is processed
/// from its last row to its first; the cache stays in processing order.
pub fn lstm_forward(
    rows: &[FeatureRow],
    reversed: bool,
    w_x: Mat<'_>,
    w_h: Mat<'_>,
    b: &[f64],
    hidden: usize,
) -> LstmCache {
    let steps = rows.len();
    let gate_width = 4 * hidden;
    debug_assert_eq!(w_x.rows(), gate_width);
    debug_assert_eq!(w_h.rows(), gate_width);
    debug_assert_eq!(b.len(), gate_width);

    let mut cache = LstmCache {
        hidden,
        gates: vec![0.0; steps * gate_width],
        c: vec![0.0; steps * hidden],
        tanh_c: vec![0.0; steps * hidden],
        h: vec![0.0; steps * hidden],
    };
    let mut h_prev = vec![0.0; hidden];
    let mut c_prev = vec![0.0; hidden];
    let mut z = vec![0.0; gate_width];

    for s in 0..steps {
        let t = if reversed { steps - 1 - s } else { s };
        z.copy_from_slice(b);
        w_h.matvec_acc(&h_prev, &mut z);
        add_input_product(w_x, &rows[t], &mut z);

        let gates = &mut cache.gates[s * gate_width..(s + 1) * gate_width];
        for k in 0..hidden {
            gates[k] = sigmoid(z[k]); // i
            gates[hidden + k] = sigmoid(z[hidden + k]); // f
            gates[2 * hidden + k] = z[2 * hidden + k].tanh(); // g
            gates[3 * hidden + k] = sigmoid(z[3 * hidden + k]); // o
        }
        let c = &mut cache.c[s * hidden..(s + 1) * hidden];
        let tanh_c = &mut cache.tanh_c[s * hidden..(s + 1) * hidden];
        let h = &mut cache.h[s * hidden..(s + 1) * hidden];
        for k in 0..hidden {
            c[k] = gates[hidden + k] * c_prev[k] + gates[k] * gates[2 * hidden + k];
            tanh_c[k] = c[k].tanh();
            h[k] = gates[3 * hidden + k] * tanh_c[k];
        }
        h_prev.copy_from_slice(h);
        c_prev.copy_from_slice(c);
    }
    cache
}

/// Backward-through-time for one direction.
///
/// `dh_seq`, when present, holds the loss gradient on every step's hidden
/// state in processing order; `dh_final` is an extra gradient on the final
/// state. Weight gradients accumulate into the column-major slices `gw_x`,
/// `gw_h` and `gb`.
#[allow(clippy::too_many_arguments)]
pub fn lstm_backward(
    rows: &[FeatureRow],
    reversed: bool,
    w_h: Mat<'_>,
    cache: &LstmCache,
    dh_seq: Option<&[f64]>,
    dh_final: Option<&[f64]>,
    gw_x: &mut [f64],
    gw_h: &mut [f64],
    gb: &mut [f64],
) {
    let steps = rows.len();
    let hidden = cache.hidden;
    let gate_width = 4 * hidden;

    let mut dh = vec![0.0; hidden];
    let mut dc = vec![0.0; hidden];
    let mut dz = vec![0.0; gate_width];

    for s in (0..steps).rev() {
        let t = if reversed { steps - 1 - s } else { s };
        if let Some(seq) = dh_seq {
            axpy(1.0, &seq[s * hidden..(s + 1) * hidden], &mut dh);
        }
        if s == steps - 1 {
            if let Some(extra) = dh_final {
                axpy(1.0, extra, &mut dh);
            }
        }

        let gates = &cache.gates[s * gate_width..(s + 1) * gate_width];
        let tanh_c = &cache.tanh_c[s * hidden..(s + 1) * hidden];
        for k in 0..hidden {
            let i = gates[k];
            let f = gates[hidden + k];
            let g = gates[2 * hidden + k];
            let o = gates[3 * hidden + k];
            let c_prev = if s == 0 { 0.0 } else { cache.c[(s - 1) * hidden + k] };

            let dck = dc[k] + dh[k] * o * (1.0 - tanh_c[k] * tanh_c[k]);
            let do_gate = dh[k] * tanh_c[k];
            dz[k] = dck * g * i * (1.0 - i);
            dz[hidden + k] = dck * c_prev * f * (1.0 - f);
            dz[2 * hidden + k] = dck * i * (1.0 - g * g);
            dz[3 * hidden + k] = do_gate * o * (1.0 - o);
            dc[k] = dck * f;
        }

        axpy(1.0, &dz, gb);
        if s > 0 {
            let h_prev = cache.h_at(s - 1);
            for (j, &hj) in h_prev.iter().enumerate() {
                if hj != 0.0 {
                    axpy(hj, &dz, &mut gw_h[j * gate_width..(j + 1) * gate_width]);
                }
            }
        }
        match &rows[t] {
            FeatureRow::Zero => {}
            FeatureRow::Ones(idx) => {
                for &j in idx {
                    let j = j as usize;
                    axpy(1.0, &dz, &mut gw_x[j * gate_width..(j + 1) * gate_width]);
                }
            }
            FeatureRow::Dense(x) => {
                for (j, &xj) in x.iter().enumerate() {
                    if xj != 0.0 {
                        axpy(xj, &dz, &mut gw_x[j * gate_width..(j + 1) * gate_width]);
                    }
                }
            }
        }

        // dh for step s-1 through the recurrent kernel
        for (j, d) in dh.iter_mut().enumerate() {
            *d = dot(w_h.col(j), &dz);
        }
    }
}
