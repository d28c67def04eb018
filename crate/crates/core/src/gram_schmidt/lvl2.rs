//! Level-2 kernels with a one-column normalization lag.
//!
//! Layout expected in the basis on entry: columns `0..k` are normalized,
//! column `k` has been projected but not normalized (the lagged column `u`),
//! and column `k + 1` is a fresh vector `w`. A single reduction then delivers
//! both `||u||` and every inner product the projection of `w` needs:
//!
//! ```text
//!   [Q^T u, u^T u, Q^T w, u^T w]      with Q = columns 0..k
//! ```
//!
//! after which `u` is normalized, the triangular correction is extended by one
//! column, and `w` is projected against columns `0..=k`. On exit `w` is the new
//! lagged column.

use crate::error::{Error, Result};
use crate::kernels::{maxpy_in_place, scale_in_place, KrylovBasis, Reduction, ReductionLedger};

use super::state::{apply_t, FactorState, TForm};
use super::breakdown_tol;

/// How the fresh column relates to the lagged one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewColumn {
    /// An independent column of a matrix being factored.
    Independent,
    /// `w = A u` for the lagged, un-normalized `u`. Once `||u||` is known, `w`
    /// is rescaled by `1 / ||u||` so it equals `A` applied to the unit vector.
    KrylovImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lvl2Step {
    /// Index of the column that was normalized by this call.
    pub normalized_column: usize,
    /// Its norm, the lagged diagonal entry of `R`.
    pub lagged_norm: f64,
    /// `R[0..=k, k + 1]`: projection coefficients of the fresh column.
    pub coeffs: Vec<f64>,
}

struct Lagged {
    k: usize,
    s: Vec<f64>,
    d: Vec<f64>,
    alpha: f64,
    e: f64,
}

fn check_layout(v: &KrylovBasis, lag: usize) -> Result<usize> {
    if v.lag() != lag || v.n_cols() < lag {
        return Err(Error::InvalidConfig(format!(
            "lagged kernel expects {lag} un-normalized trailing column(s), basis has {}",
            v.lag()
        )));
    }
    Ok(v.n_cols() - lag)
}

/// Fused reduction, breakdown check, and normalization of the lagged column.
fn reduce_and_normalize(
    v: &mut KrylovBasis,
    state: &mut FactorState,
    with_new: bool,
    ledger: &mut ReductionLedger,
) -> Result<Lagged> {
    let k = v.normalized();
    let q = v.leading(k);
    let u = v.column(k);
    let mut red = Reduction::new();
    let s_slots = red.mdot(q, u)?;
    let uu_slot = red.sum_of_squares(u);
    let (d_slots, e_slot) = if with_new {
        let w = v.column(k + 1);
        (Some(red.mdot(q, w)?), Some(red.dot(u, w)?))
    } else {
        (None, None)
    };
    let reduced = red.finish(ledger)?;

    let alpha = reduced.get(uu_slot).max(0.0).sqrt();
    let mut s = reduced.slice(s_slots).to_vec();
    let d = d_slots.map_or_else(Vec::new, |r| reduced.slice(r).to_vec());
    let e = e_slot.map_or(0.0, |slot| reduced.get(slot));

    let prior = state.r_column(k).to_vec();
    let tol = breakdown_tol(v.n(), alpha, &prior, state.breakdown_factor());
    if alpha <= tol {
        state.set_r_diag(k, 0.0);
        return Err(Error::Breakdown {
            column: k,
            coeffs: prior,
            norm: alpha,
            tol,
        });
    }
    state.set_r_diag(k, alpha);
    scale_in_place(v.column_mut(k), 1.0 / alpha);
    v.set_normalized(k + 1);
    scale_in_place(&mut s, 1.0 / alpha);
    Ok(Lagged { k, s, d, alpha, e })
}

/// Coefficients of the fresh column against `Q_{0..=k}` before the
/// triangular correction, after rescaling `w` in Krylov mode.
fn raw_coeffs(v: &mut KrylovBasis, lag: &Lagged, mode: NewColumn) -> Vec<f64> {
    let sigma = match mode {
        NewColumn::Independent => 1.0,
        NewColumn::KrylovImage => 1.0 / lag.alpha,
    };
    if mode == NewColumn::KrylovImage {
        scale_in_place(v.column_mut(lag.k + 1), sigma);
    }
    let mut r: Vec<f64> = lag.d.iter().map(|x| sigma * x).collect();
    r.push(sigma * lag.e / lag.alpha);
    r
}

fn subtract_projection(v: &mut KrylovBasis, k: usize, coeffs: &[f64]) -> Result<()> {
    let neg: Vec<f64> = coeffs.iter().map(|c| -c).collect();
    let (q, w) = v.split_at_column_mut(k + 1);
    maxpy_in_place(w, q, &neg)
}

/// Level-2 modified Gram-Schmidt with lagged normalization: one reduction per call.
///
/// With `s = Q^T u / ||u||` the compact-WY factor gains the column
/// `T[0..k, k] = -T[0..k, 0..k] s`; the fresh column's coefficients are then
/// corrected as `r <- T^T r` and subtracted with a single MAXPY.
pub fn mgs_lvl2(
    v: &mut KrylovBasis,
    state: &mut FactorState,
    mode: NewColumn,
    ledger: &mut ReductionLedger,
) -> Result<Lvl2Step> {
    check_layout(v, 2)?;
    let lag = reduce_and_normalize(v, state, true, ledger)?;
    let k = lag.k;
    state.extend_t(k, &lag.s);
    let raw = raw_coeffs(v, &lag, mode);
    let coeffs = apply_t(state, &raw, TForm::CompactWy, true)?;
    subtract_projection(v, k, &coeffs)?;
    state.set_r_above(k + 1, &coeffs);
    Ok(Lvl2Step {
        normalized_column: k,
        lagged_norm: lag.alpha,
        coeffs,
    })
}

/// Level-2 iterated classical Gram-Schmidt with lagged normalization: two
/// reductions per call.
///
/// The first reduction is shared with the lagged norm as in [`mgs_lvl2`]; the
/// coefficients are corrected with `I - L - L^T` and subtracted. A second mass
/// inner product then re-projects the result,
/// `w <- w - Q Q^T (w - Q r)`, and its coefficients are added to `r`.
pub fn cgs2_lvl2(
    v: &mut KrylovBasis,
    state: &mut FactorState,
    mode: NewColumn,
    ledger: &mut ReductionLedger,
) -> Result<Lvl2Step> {
    check_layout(v, 2)?;
    let lag = reduce_and_normalize(v, state, true, ledger)?;
    let k = lag.k;
    state.set_l_row(k, &lag.s);
    let raw = raw_coeffs(v, &lag, mode);
    let mut coeffs = apply_t(state, &raw, TForm::Cgs2, false)?;
    subtract_projection(v, k, &coeffs)?;

    let mut red = Reduction::new();
    let slots = red.mdot(v.leading(k + 1), v.column(k + 1))?;
    let second = red.finish(ledger)?.slice(slots).to_vec();
    subtract_projection(v, k, &second)?;
    for (c, s) in coeffs.iter_mut().zip(&second) {
        *c += s;
    }
    state.set_r_above(k + 1, &coeffs);
    Ok(Lvl2Step {
        normalized_column: k,
        lagged_norm: lag.alpha,
        coeffs,
    })
}

/// Normalizes the trailing lagged column when no fresh column follows (end of
/// a factorization). One reduction. Also fills the last row of `L` and column
/// of `T`.
pub fn finish_lagged(
    v: &mut KrylovBasis,
    state: &mut FactorState,
    ledger: &mut ReductionLedger,
) -> Result<f64> {
    check_layout(v, 1)?;
    let lag = reduce_and_normalize(v, state, false, ledger)?;
    state.set_l_row(lag.k, &lag.s);
    state.extend_t(lag.k, &lag.s);
    Ok(lag.alpha)
}
