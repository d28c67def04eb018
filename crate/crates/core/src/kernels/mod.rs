//! Vector and matrix primitives.
//!
//! Everything that would need a global sum on a distributed machine goes through
//! a [`Reduction`], which appends exactly one event to the [`ReductionLedger`]
//! when it is finished. SpMV and MAXPY are local and record nothing.
//!
//! Summation order is fixed (ascending index, one scalar accumulator) so results
//! are bit-reproducible on a given platform.

mod basis;
mod csr;
mod ledger;

use std::ops::Range;

pub use basis::{Columns, KrylovBasis};
pub use csr::{spmv, spmv_into, CsrMatrix};
pub use ledger::{Phase, ReductionEvent, ReductionKind, ReductionLedger};

use crate::error::{check_finite, check_len, Result};

/// Local (un-reduced) inner product, ascending index order.
pub fn local_dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        s += a * b;
    }
    s
}

/// Overflow-safe Euclidean norm without a ledger event.
///
/// Keeps a running `scale` (largest magnitude seen) and a sum of squares of
/// `x_i / scale`, in ascending index order.
pub fn local_norm(x: &[f64]) -> f64 {
    let mut scale = 0.0f64;
    let mut ssq = 1.0f64;
    for &v in x {
        if v != 0.0 {
            let a = v.abs();
            if scale < a {
                ssq = 1.0 + ssq * (scale / a) * (scale / a);
                scale = a;
            } else {
                ssq += (a / scale) * (a / scale);
            }
        }
    }
    scale * ssq.sqrt()
}

/// A batch of partial sums that is combined in one global reduction.
///
/// Each request returns the range of result slots it occupies. Calling
/// [`Reduction::finish`] records a single ledger event (none if the batch is
/// empty) and hands back the reduced values.
#[derive(Debug, Default)]
pub struct Reduction {
    values: Vec<f64>,
    mdots: usize,
    dots: usize,
    norms: usize,
}

#[derive(Debug, Clone)]
pub struct Reduced {
    values: Vec<f64>,
}

impl Reduced {
    pub fn get(&self, slot: usize) -> f64 {
        self.values[slot]
    }

    pub fn slice(&self, range: Range<usize>) -> &[f64] {
        &self.values[range]
    }
}

impl Reduction {
    pub fn new() -> Self {
        Self::default()
    }

    /// Requests `x_j . y` for every column of `x`.
    pub fn mdot(&mut self, x: Columns<'_>, y: &[f64]) -> Result<Range<usize>> {
        check_len("mass inner product", x.n(), y.len())?;
        let start = self.values.len();
        self.values.extend(x.iter().map(|c| local_dot(c, y)));
        if !x.is_empty() {
            self.mdots += 1;
        }
        Ok(start..self.values.len())
    }

    pub fn dot(&mut self, x: &[f64], y: &[f64]) -> Result<usize> {
        check_len("dot", x.len(), y.len())?;
        self.values.push(local_dot(x, y));
        self.dots += 1;
        Ok(self.values.len() - 1)
    }

    /// Requests `||x||_2`, using the overflow-safe local accumulation.
    pub fn norm(&mut self, x: &[f64]) -> usize {
        self.values.push(local_norm(x));
        self.norms += 1;
        self.values.len() - 1
    }

    /// Requests `||x||_2^2` as a plain sum of squares (the form that packs
    /// alongside inner products in one buffer).
    pub fn sum_of_squares(&mut self, x: &[f64]) -> usize {
        self.values.push(local_dot(x, x));
        self.norms += 1;
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn kind(&self) -> ReductionKind {
        match (self.mdots, self.dots, self.norms) {
            (0, 0, _) => ReductionKind::Norm,
            (0, 1, 0) => ReductionKind::Dot,
            (_, _, 0) => ReductionKind::Mdot,
            _ => ReductionKind::FusedMdotNorm,
        }
    }

    pub fn finish(self, ledger: &mut ReductionLedger) -> Result<Reduced> {
        if !self.values.is_empty() {
            ledger.record(self.kind(), self.values.len());
        }
        check_finite("global reduction", &self.values)?;
        Ok(Reduced {
            values: self.values,
        })
    }
}

/// `v_j = <x_j, y>` for the columns of `x`; one `mdot` event (none when `x` is empty).
pub fn mass_inner_product(
    x: Columns<'_>,
    y: &[f64],
    ledger: &mut ReductionLedger,
) -> Result<Vec<f64>> {
    let mut red = Reduction::new();
    let slots = red.mdot(x, y)?;
    Ok(red.finish(ledger)?.slice(slots).to_vec())
}

/// `(X^T y, ||z||_2)` in one fused event with `p + 1` scalars.
pub fn fused_mdot_norm(
    x: Columns<'_>,
    y: &[f64],
    z: &[f64],
    ledger: &mut ReductionLedger,
) -> Result<(Vec<f64>, f64)> {
    check_len("fused_mdot_norm", y.len(), z.len())?;
    let mut red = Reduction::new();
    let slots = red.mdot(x, y)?;
    let nz = red.norm(z);
    let out = red.finish(ledger)?;
    Ok((out.slice(slots).to_vec(), out.get(nz)))
}

/// Single inner product; one `dot` event.
pub fn dot(x: &[f64], y: &[f64], ledger: &mut ReductionLedger) -> Result<f64> {
    let mut red = Reduction::new();
    let s = red.dot(x, y)?;
    Ok(red.finish(ledger)?.get(s))
}

/// Euclidean norm; one `norm` event.
pub fn norm2(x: &[f64], ledger: &mut ReductionLedger) -> Result<f64> {
    check_finite("norm2 input", x)?;
    let mut red = Reduction::new();
    let s = red.norm(x);
    Ok(red.finish(ledger)?.get(s))
}

/// `y + sum_j alpha_j x_j`, accumulated column by column left to right. No reduction.
pub fn maxpy(y: &[f64], x: Columns<'_>, alpha: &[f64]) -> Result<Vec<f64>> {
    let mut out = y.to_vec();
    maxpy_in_place(&mut out, x, alpha)?;
    Ok(out)
}

pub fn maxpy_in_place(y: &mut [f64], x: Columns<'_>, alpha: &[f64]) -> Result<()> {
    check_len("maxpy coefficients", x.len(), alpha.len())?;
    check_len("maxpy vector", x.n(), y.len())?;
    for (col, &a) in x.iter().zip(alpha) {
        for (yi, xi) in y.iter_mut().zip(col) {
            *yi += a * xi;
        }
    }
    Ok(())
}

pub(crate) fn scale_in_place(y: &mut [f64], factor: f64) {
    for v in y {
        *v *= factor;
    }
}
