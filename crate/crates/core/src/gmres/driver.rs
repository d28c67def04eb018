use nalgebra::DMatrix;

use super::{
    ArnoldiData, ConvergenceHistory, GivensState, GmresConfig, IterationRecord, Method, Outcome,
    Preconditioner, Solution,
};
use crate::diagnostics::OrthogonalityMonitor;
use crate::error::{check_finite, check_len, Error, Result};
use crate::gram_schmidt::{
    cgs2_lvl2, cgs_iterated, mgs_level1, mgs_lvl2, FactorState, GsColumn, NewColumn,
};
use crate::kernels::{
    local_dot, maxpy, maxpy_in_place, norm2, scale_in_place, spmv, Columns, CsrMatrix,
    KrylovBasis, Phase, Reduction, ReductionLedger,
};

/// The one-pass norm `sqrt(||z||^2 - ||h||^2)` is rejected once the radicand
/// falls below this many ulps of `||z||^2`.
const GHYSELS_GUARD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CycleEnd {
    Converged,
    Exhausted,
    Breakdown,
    Cancellation,
}

enum Step {
    Column(GsColumn),
    Breakdown(Vec<f64>),
    Cancelled(Vec<f64>),
}

fn classify(result: Result<GsColumn>) -> Result<Step> {
    match result {
        Ok(col) => Ok(Step::Column(col)),
        Err(Error::Breakdown { coeffs, .. }) => Ok(Step::Breakdown(coeffs)),
        Err(e) => Err(e),
    }
}

/// One-pass classical Gram-Schmidt whose norm comes from the same reduction
/// as the projection coefficients.
fn ghysels_step(q: Columns<'_>, mut w: Vec<f64>, ledger: &mut ReductionLedger) -> Result<Step> {
    let mut red = Reduction::new();
    let slots = red.mdot(q, &w)?;
    let zz_slot = red.sum_of_squares(&w);
    let reduced = red.finish(ledger)?;
    let h = reduced.slice(slots).to_vec();
    let zz = reduced.get(zz_slot);
    let neg: Vec<f64> = h.iter().map(|x| -x).collect();
    maxpy_in_place(&mut w, q, &neg)?;
    let radicand = zz - local_dot(&h, &h);
    if radicand <= 0.0 || radicand < GHYSELS_GUARD * f64::EPSILON * zz {
        return Ok(Step::Cancelled(h));
    }
    let r_diag = radicand.sqrt();
    scale_in_place(&mut w, 1.0 / r_diag);
    Ok(Step::Column(GsColumn { q: w, r: h, r_diag }))
}

struct Cycle<'a> {
    a: &'a CsrMatrix,
    pre: &'a Preconditioner,
    config: &'a GmresConfig,
    index: usize,
    /// Iterations completed in earlier cycles.
    offset: usize,
    beta: f64,
    beta0: f64,
    target: f64,
    v: KrylovBasis,
    state: FactorState,
    h: DMatrix<f64>,
    givens: GivensState,
    monitor: OrthogonalityMonitor,
    completed: usize,
}

impl<'a> Cycle<'a> {
    fn operator(&self, u: &[f64]) -> Result<Vec<f64>> {
        spmv(self.a, &self.pre.apply(u))
    }

    /// Stores Hessenberg column `j`, updates the rotations, and records the
    /// iteration. Returns whether the target was reached.
    fn complete_column(
        &mut self,
        j: usize,
        col: &[f64],
        records: &mut Vec<IterationRecord>,
        ledger: &ReductionLedger,
    ) -> Result<bool> {
        for (i, &hij) in col.iter().enumerate() {
            self.h[(i, j)] = hij;
        }
        let res = self.givens.update(col)?;
        let iter = self.offset + j + 1;
        let every = self.config.diag_every;
        let (s_norm, orth_loss) = if every > 0 && iter.is_multiple_of(every) {
            let p = self.v.normalized().min(j + 2);
            self.monitor.sync(self.v.leading(p));
            (Some(self.monitor.s_norm()), Some(self.monitor.orth_loss()))
        } else {
            (None, None)
        };
        records.push(IterationRecord {
            iter,
            cycle: self.index,
            implicit_rel_res: res / self.beta0,
            true_rel_res: None,
            s_norm,
            orth_loss,
            reductions: ledger.count_for_iteration(iter),
        });
        self.completed = j + 1;
        Ok(res <= self.target)
    }

    /// Arnoldi with the new column normalized in the same iteration.
    fn run_standard(
        &mut self,
        records: &mut Vec<IterationRecord>,
        ledger: &mut ReductionLedger,
    ) -> Result<CycleEnd> {
        for j in 0..self.config.restart_m {
            ledger.set_position(Phase::Iteration, self.offset + j + 1);
            let w = self.operator(self.v.column(j))?;
            let q = self.v.leading(j + 1);
            let step = match self.config.method {
                Method::MgsL1 => classify(mgs_level1(q, &w, &mut self.state, ledger))?,
                Method::Cgs2 => classify(cgs_iterated(q, &w, 2, &mut self.state, ledger))?,
                Method::Cgs1Ghysels => ghysels_step(q, w, ledger)?,
                m => unreachable!("{m:?} is lagged"),
            };
            match step {
                Step::Column(col) => {
                    let mut h = col.r;
                    h.push(col.r_diag);
                    self.v.push(&col.q)?;
                    self.v.set_normalized(j + 2);
                    if self.complete_column(j, &h, records, ledger)? {
                        return Ok(CycleEnd::Converged);
                    }
                }
                Step::Breakdown(mut h) | Step::Cancelled(mut h) => {
                    let cancelled = matches!(self.config.method, Method::Cgs1Ghysels);
                    h.push(0.0);
                    self.complete_column(j, &h, records, ledger)?;
                    return Ok(if cancelled {
                        CycleEnd::Cancellation
                    } else {
                        CycleEnd::Breakdown
                    });
                }
            }
        }
        Ok(CycleEnd::Exhausted)
    }

    /// Arnoldi with lagged normalization. Step `k` applies the operator to the
    /// still un-normalized column `k - 1`; its single kernel call returns the
    /// norm of that column, which is the subdiagonal entry that completes
    /// Hessenberg column `k - 2`. Step 1 only re-normalizes the start vector
    /// and is booked as startup work.
    ///
    /// With `pipelined`, rotations are applied after every second step
    /// instead of every step; the arithmetic is unchanged.
    fn run_lagged(
        &mut self,
        pipelined: bool,
        records: &mut Vec<IterationRecord>,
        ledger: &mut ReductionLedger,
    ) -> Result<CycleEnd> {
        let m = self.config.restart_m;
        let mut prev: Vec<f64> = Vec::new();
        let mut pending: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut end = None;
        for k in 1..=m + 1 {
            if k == 1 {
                ledger.set_position(Phase::Startup, self.offset);
                ledger.set_overlap_eligible(false);
            } else {
                ledger.set_position(Phase::Iteration, self.offset + k - 1);
                ledger.set_overlap_eligible(pipelined);
            }
            let w = self.operator(self.v.column(k - 1))?;
            self.v.push(&w)?;
            let step = match self.config.method {
                Method::TwoSyncCgs2 => {
                    cgs2_lvl2(&mut self.v, &mut self.state, NewColumn::KrylovImage, ledger)
                }
                _ => mgs_lvl2(&mut self.v, &mut self.state, NewColumn::KrylovImage, ledger),
            };
            match step {
                Ok(s) => {
                    if k == 1 {
                        self.givens = GivensState::new(self.beta * s.lagged_norm);
                    } else {
                        let mut col = std::mem::take(&mut prev);
                        col.push(s.lagged_norm);
                        pending.push((k - 2, col));
                    }
                    prev = s.coeffs;
                }
                Err(Error::Breakdown { .. }) => {
                    if k >= 2 {
                        let mut col = std::mem::take(&mut prev);
                        col.push(0.0);
                        pending.push((k - 2, col));
                    }
                    end = Some(CycleEnd::Breakdown);
                }
                Err(e) => {
                    ledger.set_overlap_eligible(false);
                    return Err(e);
                }
            }
            if !pipelined || k % 2 == 1 || k == m + 1 || end.is_some() {
                for (j, col) in pending.drain(..) {
                    if self.complete_column(j, &col, records, ledger)? {
                        ledger.set_overlap_eligible(false);
                        return Ok(CycleEnd::Converged);
                    }
                }
            }
            if let Some(end) = end {
                ledger.set_overlap_eligible(false);
                return Ok(end);
            }
        }
        ledger.set_overlap_eligible(false);
        Ok(CycleEnd::Exhausted)
    }

    /// Least-squares coefficients for the completed columns, dropping
    /// trailing columns whose rotated diagonal vanished.
    fn coefficients(&self) -> Result<Vec<f64>> {
        let mut k = self.completed;
        loop {
            match self.givens.solve(k) {
                Ok(y) => return Ok(y),
                Err(Error::SingularTriangular { row }) => k = row,
                Err(e) => return Err(e),
            }
        }
    }

    fn arnoldi_data(&self) -> Result<ArnoldiData> {
        let k = self.completed;
        let n = self.v.n();
        let mut basis = KrylovBasis::new(n, k + 1);
        for c in 0..=k {
            if c < self.v.normalized() {
                basis.push(self.v.column(c))?;
            } else {
                basis.push(&vec![0.0; n])?;
            }
        }
        basis.set_normalized(k + 1);
        let h_bar = self.h.view((0, 0), (k + 1, k)).into_owned();
        Ok(ArnoldiData {
            basis,
            h_bar,
            steps: k,
        })
    }
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let ax = spmv(a, x)?;
    Ok(b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect())
}

pub(super) fn solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    config: &GmresConfig,
    ledger: &mut ReductionLedger,
) -> Result<Solution> {
    config.validate()?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "GMRES needs a square matrix",
            expected: a.n_rows(),
            found: a.n_cols(),
        });
    }
    let n = a.n_rows();
    check_len("right-hand side", n, b.len())?;
    check_finite("right-hand side", b)?;
    if b.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroRhs);
    }
    let mut x = match x0 {
        Some(x0) => {
            check_len("initial guess", n, x0.len())?;
            check_finite("initial guess", x0)?;
            x0.to_vec()
        }
        None => vec![0.0; n],
    };
    let pre = Preconditioner::new(config.precond, a)?;

    ledger.set_overlap_eligible(false);
    ledger.set_position(Phase::Startup, 0);
    let mut r = residual(a, b, &x)?;
    let mut beta = norm2(&r, ledger)?;
    let beta0 = beta;
    let mut history = ConvergenceHistory {
        records: Vec::new(),
        outcome: Outcome::Converged,
        initial_residual: beta0,
        final_true_rel_res: 0.0,
    };
    if beta0 == 0.0 {
        return Ok(Solution {
            x,
            history,
            arnoldi: None,
        });
    }
    let target = config.rel_tol * beta0;
    let m = config.restart_m;
    let lag = usize::from(config.method.is_lagged());
    let mut done = 0;
    let mut arnoldi = None;

    for cycle in 0..=config.max_restarts {
        let mut v = KrylovBasis::new(n, m + 1 + lag);
        let v0: Vec<f64> = r.iter().map(|ri| ri / beta).collect();
        v.push(&v0)?;
        v.set_normalized(1 - lag);
        let mut cyc = Cycle {
            a,
            pre: &pre,
            config,
            index: cycle,
            offset: done,
            beta,
            beta0,
            target,
            v,
            state: FactorState::new(m + 1 + lag).with_breakdown_factor(config.breakdown_tol_factor),
            h: DMatrix::zeros(m + 1, m),
            givens: GivensState::new(beta),
            monitor: OrthogonalityMonitor::new(),
            completed: 0,
        };
        let end = match config.method {
            Method::OneSyncMgs | Method::TwoSyncCgs2 => {
                cyc.run_lagged(false, &mut history.records, ledger)?
            }
            Method::Pipeline2 => cyc.run_lagged(true, &mut history.records, ledger)?,
            _ => cyc.run_standard(&mut history.records, ledger)?,
        };

        let y = cyc.coefficients()?;
        if !y.is_empty() {
            let z = maxpy(&vec![0.0; n], cyc.v.leading(y.len()), &y)?;
            for (xi, dz) in x.iter_mut().zip(pre.apply(&z)) {
                *xi += dz;
            }
        }
        done += cyc.completed;
        arnoldi = Some(cyc.arnoldi_data()?);

        ledger.set_overlap_eligible(false);
        ledger.set_position(Phase::Finalize, done);
        r = residual(a, b, &x)?;
        beta = norm2(&r, ledger)?;
        let true_rel = beta / beta0;
        if let Some(last) = history.records.last_mut().filter(|rec| rec.cycle == cycle) {
            last.true_rel_res = Some(true_rel);
        }
        history.final_true_rel_res = true_rel;

        // A breakdown or cancellation ends the cycle early. It is only a failure
        // if the true residual is still above target and no restart is left.
        let last_cycle = cycle == config.max_restarts;
        let outcome = match end {
            CycleEnd::Converged => Some(Outcome::Converged),
            _ if beta <= target => Some(Outcome::Converged),
            _ if !last_cycle => None,
            CycleEnd::Breakdown => Some(Outcome::Breakdown),
            CycleEnd::Cancellation => Some(Outcome::CancellationFailure),
            CycleEnd::Exhausted => Some(Outcome::StalledMaxiter),
        };
        if let Some(outcome) = outcome {
            history.outcome = outcome;
            break;
        }
    }
    Ok(Solution {
        x,
        history,
        arnoldi,
    })
}
