//! Stability measurements: Paige's `||S||_2`, `||I - Q^T Q||_2`, and the
//! Arnoldi relation residual.
//!
//! Nothing here touches a [`ReductionLedger`](crate::kernels::ReductionLedger);
//! the inner products are local and do not count as synchronizations.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::kernels::{local_dot, spmv, Columns, CsrMatrix};

/// Threshold on `||S||_2` that marks complete loss of orthogonality.
pub const STALL_THRESHOLD: f64 = 0.99;

const POWER_TOL: f64 = 1e-10;
const POWER_SEED: u64 = 0x5eed;
const POWER_MIN_STEPS: usize = 1000;

/// Gram matrix `Q^T Q`.
pub fn gram(q: Columns<'_>) -> DMatrix<f64> {
    let p = q.len();
    let mut g = DMatrix::zeros(p, p);
    for j in 0..p {
        for i in 0..=j {
            let v = local_dot(q.column(i), q.column(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// 2-norm of a small dense matrix by power iteration on `M^T M`.
///
/// The start vector is drawn from a fixed seed, so results are reproducible.
/// Stops when the Rayleigh quotient changes by less than `1e-10` relative, or
/// after `max(10 p, 1000)` steps. Small fixed caps stall when the top two
/// singular values are close.
pub fn spectral_norm_small(m: &DMatrix<f64>) -> f64 {
    let p = m.ncols();
    if p == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let b = m.transpose() * m;
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut x = nalgebra::DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
    x /= x.norm();
    let mut lambda = 0.0_f64;
    for _ in 0..(10 * p).max(POWER_MIN_STEPS) {
        let y = &b * &x;
        let next = x.dot(&y);
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        x = y / ny;
        let done = (next - lambda).abs() <= POWER_TOL * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    // One last Rayleigh quotient on the converged direction.
    lambda = lambda.max(x.dot(&(&b * &x)));
    lambda.max(0.0).sqrt()
}

/// `||S||_2` with `S = (I + L^T)^{-1} L^T`, where `L` is the strictly lower
/// part of the Gram matrix `G = I + L + L^T`.
pub fn paige_from_gram(g: &DMatrix<f64>) -> f64 {
    let p = g.nrows();
    // U = I + L^T is unit upper triangular with U[i][j] = G[j][i] = G[i][j].
    // Solve U S = L^T column by column by back substitution.
    let mut s = DMatrix::zeros(p, p);
    for c in 0..p {
        for i in (0..p).rev() {
            let mut acc = if c > i { g[(c, i)] } else { 0.0 };
            for k in i + 1..p {
                acc -= g[(i, k)] * s[(k, c)];
            }
            s[(i, c)] = acc;
        }
    }
    spectral_norm_small(&s)
}

/// `||I - G||_2`.
pub fn orth_loss_from_gram(g: &DMatrix<f64>) -> f64 {
    let p = g.nrows();
    let e = DMatrix::identity(p, p) - g;
    spectral_norm_small(&e)
}

/// Paige's loss-of-orthogonality metric for normalized columns `q`.
pub fn paige_metric(q: Columns<'_>) -> f64 {
    paige_from_gram(&gram(q))
}

/// `||I - Q^T Q||_2`.
pub fn orthogonality_loss(q: Columns<'_>) -> f64 {
    orth_loss_from_gram(&gram(q))
}

/// `||A V_m - V_{m+1} H_bar||_F / ||A||_F`, with `v` holding at least `m + 1`
/// columns and `h_bar` at least `(m + 1) x m`.
pub fn arnoldi_residual(
    a: &CsrMatrix,
    v: Columns<'_>,
    h_bar: &DMatrix<f64>,
    m: usize,
) -> Result<f64> {
    for (context, needed, found) in [
        ("arnoldi_residual basis columns", m + 1, v.len()),
        ("arnoldi_residual H rows", m + 1, h_bar.nrows()),
        ("arnoldi_residual H cols", m, h_bar.ncols()),
    ] {
        if found < needed {
            return Err(Error::DimensionMismatch {
                context,
                expected: needed,
                found,
            });
        }
    }
    check_len("arnoldi_residual vector length", a.n_cols(), v.n())?;
    let mut sum = 0.0;
    for j in 0..m {
        let mut r = spmv(a, v.column(j))?;
        for i in 0..=j + 1 {
            let h = h_bar[(i, j)];
            if h != 0.0 {
                for (rk, vk) in r.iter_mut().zip(v.column(i)) {
                    *rk -= h * vk;
                }
            }
        }
        sum += local_dot(&r, &r);
    }
    let norm_a = a.frobenius_norm();
    Ok(if norm_a == 0.0 { sum.sqrt() } else { sum.sqrt() / norm_a })
}

/// First iteration whose `||S||_2` reaches [`STALL_THRESHOLD`].
pub fn stall_iteration<I>(s_norms: I) -> Option<usize>
where
    I: IntoIterator<Item = (usize, f64)>,
{
    s_norms
        .into_iter()
        .find(|&(_, s)| s >= STALL_THRESHOLD)
        .map(|(i, _)| i)
}

/// Gram matrix of a growing basis, extended one column at a time so that
/// evaluating the metrics every few iterations costs `O(n p)` per new column.
#[derive(Debug, Clone, Default)]
pub struct OrthogonalityMonitor {
    cols: Vec<Vec<f64>>,
    g: Vec<Vec<f64>>,
}

impl OrthogonalityMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.cols.clear();
        self.g.clear();
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    /// Adds any normalized columns of `q` beyond those already seen.
    pub fn sync(&mut self, q: Columns<'_>) {
        for j in self.cols.len()..q.len() {
            let col = q.column(j);
            let mut row: Vec<f64> = self.cols.iter().map(|c| local_dot(c, col)).collect();
            row.push(local_dot(col, col));
            self.cols.push(col.to_vec());
            self.g.push(row);
        }
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let p = self.g.len();
        DMatrix::from_fn(p, p, |i, j| if i >= j { self.g[i][j] } else { self.g[j][i] })
    }

    pub fn s_norm(&self) -> f64 {
        paige_from_gram(&self.gram())
    }

    pub fn orth_loss(&self) -> f64 {
        orth_loss_from_gram(&self.gram())
    }
}

/// Stability summary of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Iteration index of each sample below.
    pub iterations: Vec<usize>,
    pub s_norm: Vec<f64>,
    pub orth_loss: Vec<f64>,
    pub arnoldi_residual: Vec<f64>,
    /// `sigma_max / sigma_min` of the last Hessenberg matrix, if available.
    pub kappa_estimate: Option<f64>,
    pub stall_iteration: Option<usize>,
}

impl StabilityReport {
    pub fn new(
        iterations: Vec<usize>,
        s_norm: Vec<f64>,
        orth_loss: Vec<f64>,
        arnoldi_residual: Vec<f64>,
        kappa_estimate: Option<f64>,
    ) -> Self {
        let stall_iteration = stall_iteration(iterations.iter().copied().zip(s_norm.iter().copied()));
        Self {
            iterations,
            s_norm,
            orth_loss,
            arnoldi_residual,
            kappa_estimate,
            stall_iteration,
        }
    }
}

/// 2-norm condition number of a small dense matrix (SVD).
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}
