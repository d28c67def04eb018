//! Built-in test problems and right-hand sides.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{local_norm, spmv, CsrMatrix};

/// Default seed for random right-hand sides when none is given.
pub const DEFAULT_SEED: u64 = 42;

/// Diagonal matrix `diag(first, 2, 3, ..., n)`. With the defaults
/// (`n = 100`, `first = 1e-8`) the condition number is `1e10`.
pub fn gen_simoncini(n: usize, first: f64) -> CsrMatrix {
    let mut diag: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    if let Some(d) = diag.first_mut() {
        *d = first;
    }
    CsrMatrix::from_diagonal(&diag)
}

/// Five-point Laplacian on an `nx x nx` grid with Dirichlet boundaries.
pub fn gen_laplace2d(nx: usize) -> CsrMatrix {
    let n = nx * nx;
    let mut triplets = Vec::with_capacity(5 * n);
    for i in 0..nx {
        for j in 0..nx {
            let row = i * nx + j;
            triplets.push((row, row, 4.0));
            if i > 0 {
                triplets.push((row, row - nx, -1.0));
            }
            if i + 1 < nx {
                triplets.push((row, row + nx, -1.0));
            }
            if j > 0 {
                triplets.push((row, row - 1, -1.0));
            }
            if j + 1 < nx {
                triplets.push((row, row + 1, -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &triplets).expect("grid indices are in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhsSpec {
    /// `b = A * ones`.
    OnesImage,
    /// Standard normal entries from a seeded generator, scaled to unit norm.
    Random { seed: u64 },
}

/// Seeded standard normal vector (ChaCha8 stream), not normalized.
pub fn standard_normal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn gen_rhs(spec: RhsSpec, a: &CsrMatrix) -> Result<Vec<f64>> {
    match spec {
        RhsSpec::OnesImage => spmv(a, &vec![1.0; a.n_cols()]),
        RhsSpec::Random { seed } => {
            let mut b = standard_normal(a.n_rows(), seed);
            let norm = local_norm(&b);
            if norm == 0.0 {
                return Err(Error::ZeroRhs);
            }
            b.iter_mut().for_each(|v| *v /= norm);
            Ok(b)
        }
    }
}

/// Seeded `n x p` matrix (returned as columns) with singular values spaced
/// logarithmically from 1 down to `1 / kappa`, so its 2-norm condition number
/// is `kappa`.
pub fn conditioned_columns(n: usize, p: usize, kappa: f64, seed: u64) -> Vec<Vec<f64>> {
    assert!(p <= n && p > 0);
    let g1 = DMatrix::from_vec(n, p, standard_normal(n * p, seed));
    let g2 = DMatrix::from_vec(p, p, standard_normal(p * p, seed.wrapping_add(1)));
    let u = g1.qr().q();
    let w = g2.qr().q();
    let sigma = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            let t = if p == 1 { 0.0 } else { i as f64 / (p - 1) as f64 };
            kappa.powf(-t)
        } else {
            0.0
        }
    });
    let a = u * sigma * w.transpose();
    (0..p).map(|j| a.column(j).iter().copied().collect()).collect()
}

/// Seeded dense square system `A = shift * I + G / sqrt(n)` as CSR, with `G`
/// standard normal. A shift of a few units keeps it well conditioned.
pub fn random_dense_system(n: usize, shift: f64, seed: u64) -> CsrMatrix {
    let g = standard_normal(n * n, seed);
    let scale = 1.0 / (n as f64).sqrt();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| g[i * n + j] * scale + if i == j { shift } else { 0.0 })
                .collect()
        })
        .collect();
    CsrMatrix::from_dense(&rows).expect("dense rows have equal length")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simoncini_entries() {
        let a = gen_simoncini(3, 1e-8);
        assert_eq!(a.diagonal(), vec![1e-8, 2.0, 3.0]);
        let d = gen_simoncini(100, 1e-8);
        assert_eq!(d.nnz(), 100);
        let diag = d.diagonal();
        let max = diag.iter().cloned().fold(f64::MIN, f64::max);
        let min = diag.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max / min - 1e10).abs() / 1e10 < 1e-12);
    }

    #[test]
    fn rhs_variants() {
        let a = gen_simoncini(5, 1e-8);
        assert_eq!(gen_rhs(RhsSpec::OnesImage, &a).unwrap(), a.diagonal());
        let b = gen_rhs(RhsSpec::Random { seed: 7 }, &a).unwrap();
        assert!((local_norm(&b) - 1.0).abs() <= 4.0 * f64::EPSILON);
        let again = gen_rhs(RhsSpec::Random { seed: 7 }, &a).unwrap();
        assert_eq!(
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            again.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_ne!(b, gen_rhs(RhsSpec::Random { seed: 8 }, &a).unwrap());
    }

    #[test]
    fn laplace_is_symmetric_with_row_sums() {
        let a = gen_laplace2d(4);
        assert_eq!(a.n_rows(), 16);
        let d = a.to_dense();
        for (i, row) in d.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, d[j][i]);
            }
        }
        assert_eq!(a.nnz(), 16 + 2 * 2 * 4 * 3);
    }
}
