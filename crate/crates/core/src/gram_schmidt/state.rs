use crate::error::{Error, Result};

/// Small dense factors shared by the Gram-Schmidt kernels.
///
/// * `R`: upper triangular, `R[i][j]` for `i <= j`.
/// * `T`: upper triangular with unit diagonal, `T = (I + L^T)^{-1}`, built one
///   column at a time. The modified Gram-Schmidt projector is `I - Q T^T Q^T`.
/// * `L`: strictly lower part of `Q^T Q = I + L + L^T`, used by the CGS2 path.
///
/// All three are `capacity x capacity`, column-major.
#[derive(Debug, Clone)]
pub struct FactorState {
    capacity: usize,
    r: Vec<f64>,
    t: Vec<f64>,
    l: Vec<f64>,
    active: usize,
    breakdown_factor: f64,
}

/// Which triangular correction [`apply_t`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TForm {
    /// The recursively built upper triangular `T` of the compact WY form.
    CompactWy,
    /// The symmetric `I - L - L^T` of the two-pass classical variant.
    Cgs2,
}

impl FactorState {
    pub fn new(capacity: usize) -> Self {
        let mut t = vec![0.0; capacity * capacity];
        for i in 0..capacity {
            t[i * capacity + i] = 1.0;
        }
        Self {
            capacity,
            r: vec![0.0; capacity * capacity],
            t,
            l: vec![0.0; capacity * capacity],
            active: 0,
            breakdown_factor: 1.0,
        }
    }

    pub fn with_breakdown_factor(mut self, factor: f64) -> Self {
        self.breakdown_factor = factor;
        self
    }

    pub fn breakdown_factor(&self) -> f64 {
        self.breakdown_factor
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of columns whose `R` diagonal has been fixed.
    pub fn active(&self) -> usize {
        self.active
    }

    pub fn reset(&mut self) {
        *self = Self::new(self.capacity).with_breakdown_factor(self.breakdown_factor);
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        assert!(i < self.capacity && j < self.capacity);
        j * self.capacity + i
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.r[self.idx(i, j)]
    }

    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.t[self.idx(i, j)]
    }

    pub fn l(&self, i: usize, j: usize) -> f64 {
        self.l[self.idx(i, j)]
    }

    /// `R[0..j, j]`.
    pub fn r_column(&self, j: usize) -> &[f64] {
        let start = self.idx(0, j);
        &self.r[start..start + j]
    }

    pub(crate) fn set_r_above(&mut self, j: usize, coeffs: &[f64]) {
        let start = self.idx(0, j);
        self.r[start..start + coeffs.len()].copy_from_slice(coeffs);
    }

    pub(crate) fn set_r_diag(&mut self, j: usize, value: f64) {
        let k = self.idx(j, j);
        self.r[k] = value;
        self.active = self.active.max(j + 1);
    }

    pub(crate) fn set_r_column(&mut self, j: usize, coeffs: &[f64], diag: f64) {
        self.set_r_above(j, coeffs);
        self.set_r_diag(j, diag);
    }

    /// Stores row `k` of `L`: `L[k][0..k] = values`.
    pub fn set_l_row(&mut self, k: usize, values: &[f64]) {
        assert!(values.len() <= k);
        for (j, &v) in values.iter().enumerate() {
            let i = self.idx(k, j);
            self.l[i] = v;
        }
    }

    /// One step of the recursive construction of `T`:
    /// `T[0..k, k] = -T[0..k, 0..k] * s`, where `s = Q_{:,0..k}^T q_k`
    /// holds the inner products of the newly normalized column `k` with its
    /// predecessors (column `k` of `L^T`).
    pub fn extend_t(&mut self, k: usize, s: &[f64]) {
        assert_eq!(s.len(), k);
        let mut col = vec![0.0; k];
        // Upper triangular times vector: entry i only sees s[i..k].
        for (i, ci) in col.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, sj) in s.iter().enumerate().skip(i) {
                acc += self.t(i, j) * sj;
            }
            *ci = -acc;
        }
        let start = self.idx(0, k);
        self.t[start..start + k].copy_from_slice(&col);
    }

    /// Dense copy of the leading `p x p` block of `R`, row-major.
    pub fn r_dense(&self, p: usize) -> Vec<Vec<f64>> {
        (0..p)
            .map(|i| (0..p).map(|j| if i <= j { self.r(i, j) } else { 0.0 }).collect())
            .collect()
    }
}

/// Applies the triangular correction to `y`.
///
/// For [`TForm::CompactWy`] this is `T y` (or `T^T y`); for [`TForm::Cgs2`]
/// `T = I - L - L^T` is symmetric and `transpose` has no effect. The dimension
/// is `y.len()`; rows and columns past the active block act as identity.
pub fn apply_t(state: &FactorState, y: &[f64], form: TForm, transpose: bool) -> Result<Vec<f64>> {
    let k = y.len();
    if k > state.capacity {
        return Err(Error::DimensionMismatch {
            context: "apply_t",
            expected: state.capacity,
            found: k,
        });
    }
    let mut out = vec![0.0; k];
    match form {
        TForm::CompactWy => {
            for (i, oi) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                if transpose {
                    // (T^T y)_i = sum_{j <= i} T[j][i] y_j
                    for (j, yj) in y.iter().enumerate().take(i + 1) {
                        acc += state.t(j, i) * yj;
                    }
                } else {
                    for (j, yj) in y.iter().enumerate().skip(i) {
                        acc += state.t(i, j) * yj;
                    }
                }
                *oi = acc;
            }
        }
        TForm::Cgs2 => {
            for (i, oi) in out.iter_mut().enumerate() {
                let mut acc = y[i];
                for (j, yj) in y.iter().enumerate() {
                    if j < i {
                        acc -= state.l(i, j) * yj;
                    } else if j > i {
                        acc -= state.l(j, i) * yj;
                    }
                }
                *oi = acc;
            }
        }
    }
    Ok(out)
}
