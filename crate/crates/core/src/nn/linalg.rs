//! Dense kernels over column-major views into flat parameter storage.
//!
//! Weight matrices are stored column-major so that the sparse one-/multi-hot
//! inputs reduce to contiguous column gathers, on both the forward pass and
//! the weight-gradient accumulation.

/// Immutable column-major matrix view.
#[derive(Clone, Copy)]
pub struct Mat<'a> {
    data: &'a [f64],
    rows: usize,
    cols: usize,
}

impl<'a> Mat<'a> {
    pub fn new(data: &'a [f64], rows: usize, cols: usize) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix view size mismatch");
        Mat { data, rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, c: usize) -> &'a [f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// y += A x
    pub fn matvec_acc(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), y);
            }
        }
    }

    /// out += Aᵀ y
    pub fn matvec_t_acc(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (j, o) in out.iter_mut().enumerate() {
            *o += dot(self.col(j), y);
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// gA += dz ⊗ x over a column-major gradient slice.
pub fn acc_outer(ga: &mut [f64], rows: usize, dz: &[f64], x: &[f64]) {
    debug_assert_eq!(dz.len(), rows);
    debug_assert_eq!(ga.len(), rows * x.len());
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            axpy(xj, dz, &mut ga[j * rows..(j + 1) * rows]);
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// In-place stable softmax.
pub fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// dz = p ∘ (dp − p·dp), the reverse of `softmax_in_place`.
pub fn softmax_backward(p: &[f64], dp: &[f64], dz: &mut [f64]) {
    let s = dot(p, dp);
    for ((z, &pi), &di) in dz.iter_mut().zip(p).zip(dp) {
        *z = pi * (di - s);
    }
}
