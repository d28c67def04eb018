//! Gram-Schmidt orthogonalization kernels.
//!
//! Five kernels share one [`FactorState`] (the triangular factor `R`, the
//! compact-WY correction `T`, and the strictly lower inner-product matrix `L`):
//!
//! | kernel              | reductions per column (basis size p) |
//! |---------------------|--------------------------------------|
//! | [`cgs_iterated`]    | passes + 1                           |
//! | [`mgs_level1`]      | p + 1                                |
//! | [`cgs2_two_sync`]   | 2                                    |
//! | [`mgs_lvl2`]        | 1                                    |
//! | [`cgs2_lvl2`]       | 2                                    |
//!
//! The last two delay normalization of a column by one call so that its norm
//! travels in the same reduction as the next column's inner products.

mod factor;
mod lvl2;
mod state;

pub use factor::{factor, GsKernel, QrFactors};
pub use lvl2::{cgs2_lvl2, finish_lagged, mgs_lvl2, Lvl2Step, NewColumn};
pub use state::{apply_t, FactorState, TForm};

use crate::error::{Error, Result};
use crate::kernels::{
    local_dot, maxpy_in_place, scale_in_place, Columns, Reduction, ReductionLedger,
};

/// Result of orthogonalizing one column against a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GsColumn {
    /// The new unit vector.
    pub q: Vec<f64>,
    /// Projection coefficients against the existing columns.
    pub r: Vec<f64>,
    /// Norm of the projected vector (the new diagonal entry of `R`).
    pub r_diag: f64,
}

/// Happy-breakdown threshold: `eps * sqrt(n) * ||column before projection||`,
/// scaled by a user factor. The pre-projection norm is recovered from already
/// reduced quantities as `sqrt(r_diag^2 + ||r||^2)` so no extra reduction is spent.
pub(crate) fn breakdown_tol(n: usize, r_diag: f64, coeffs: &[f64], factor: f64) -> f64 {
    let before = (r_diag * r_diag + local_dot(coeffs, coeffs)).sqrt();
    factor * f64::EPSILON * (n as f64).sqrt() * before
}

fn normalize_or_breakdown(
    column: usize,
    mut a: Vec<f64>,
    r: Vec<f64>,
    r_diag: f64,
    state: &mut FactorState,
) -> Result<GsColumn> {
    let tol = breakdown_tol(a.len(), r_diag, &r, state.breakdown_factor());
    state.set_r_column(column, &r, if r_diag > tol { r_diag } else { 0.0 });
    if r_diag <= tol {
        return Err(Error::Breakdown {
            column,
            coeffs: r,
            norm: r_diag,
            tol,
        });
    }
    scale_in_place(&mut a, 1.0 / r_diag);
    Ok(GsColumn { q: a, r, r_diag })
}

/// Classical Gram-Schmidt with `passes` projection passes.
///
/// Each pass reduces `s = Q^T a` once, accumulates `r += s` and projects
/// `a -= Q s`; the final norm is one more reduction. With `passes = 2` the result
/// is orthogonal to working precision.
pub fn cgs_iterated(
    q: Columns<'_>,
    a: &[f64],
    passes: usize,
    state: &mut FactorState,
    ledger: &mut ReductionLedger,
) -> Result<GsColumn> {
    if passes == 0 {
        return Err(Error::InvalidConfig("cgs_iterated needs at least one pass".into()));
    }
    let p = q.len();
    let mut a = a.to_vec();
    let mut r = vec![0.0; p];
    if p > 0 {
        for _ in 0..passes {
            let mut red = Reduction::new();
            let slots = red.mdot(q, &a)?;
            let reduced = red.finish(ledger)?;
            let s = reduced.slice(slots);
            for (ri, si) in r.iter_mut().zip(s) {
                *ri += si;
            }
            let neg: Vec<f64> = s.iter().map(|v| -v).collect();
            maxpy_in_place(&mut a, q, &neg)?;
        }
    }
    let mut red = Reduction::new();
    let slot = red.norm(&a);
    let r_diag = red.finish(ledger)?.get(slot);
    normalize_or_breakdown(p, a, r, r_diag, state)
}

/// Column-oriented modified Gram-Schmidt: `p` rank-one updates, each with its
/// own scalar reduction, then the norm.
pub fn mgs_level1(
    q: Columns<'_>,
    a: &[f64],
    state: &mut FactorState,
    ledger: &mut ReductionLedger,
) -> Result<GsColumn> {
    let p = q.len();
    let mut a = a.to_vec();
    let mut r = Vec::with_capacity(p);
    for qi in q.iter() {
        let mut red = Reduction::new();
        let slot = red.dot(qi, &a)?;
        let s = red.finish(ledger)?.get(slot);
        for (aj, qj) in a.iter_mut().zip(qi) {
            *aj -= s * qj;
        }
        r.push(s);
    }
    let mut red = Reduction::new();
    let slot = red.norm(&a);
    let r_diag = red.finish(ledger)?.get(slot);
    normalize_or_breakdown(p, a, r, r_diag, state)
}

/// Iterated classical Gram-Schmidt in two reductions.
///
/// The first reduction batches `y = Q^T a` with the new row of `L`
/// (`Q_{:,1:p-1}^T q_p`, the most recent column against its predecessors).
/// The coefficients are corrected as `r = (I - L - L^T) y`, the vector is
/// projected with that `r`, and the norm is the second reduction.
pub fn cgs2_two_sync(
    q: Columns<'_>,
    state: &mut FactorState,
    a: &[f64],
    ledger: &mut ReductionLedger,
) -> Result<GsColumn> {
    let p = q.len();
    let mut a = a.to_vec();
    let mut r = Vec::new();
    if p > 0 {
        let mut red = Reduction::new();
        let y_slots = red.mdot(q, &a)?;
        let l_slots = red.mdot(q.leading(p - 1), q.column(p - 1))?;
        let reduced = red.finish(ledger)?;
        state.set_l_row(p - 1, reduced.slice(l_slots));
        r = apply_t(state, reduced.slice(y_slots), TForm::Cgs2, false)?;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        maxpy_in_place(&mut a, q, &neg)?;
    }
    let mut red = Reduction::new();
    let slot = red.norm(&a);
    let r_diag = red.finish(ledger)?.get(slot);
    normalize_or_breakdown(p, a, r, r_diag, state)
}

#[cfg(test)]
mod tests;
