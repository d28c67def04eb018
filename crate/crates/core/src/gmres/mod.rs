//! Restarted GMRES with interchangeable orthogonalization.
//!
//! | method           | Arnoldi kernel                         | reductions / iteration |
//! |------------------|----------------------------------------|------------------------|
//! | `mgs_l1`         | column-oriented modified Gram-Schmidt   | `i + 1` at iteration i |
//! | `cgs2`           | classical Gram-Schmidt, two passes      | 3                      |
//! | `cgs1_ghysels`   | one-pass classical, norm by Pythagoras  | 1                      |
//! | `two_sync_cgs2`  | lagged level-2 CGS2                     | 2                      |
//! | `one_sync_mgs`   | lagged level-2 MGS (compact WY)         | 1                      |
//! | `pipeline2`      | `one_sync_mgs`, depth-2 schedule        | 1                      |
//!
//! Preconditioning is applied on the right, so residual norms are those of
//! the original system. Convergence is tested on the Givens (implicit)
//! residual against `rel_tol * ||b - A x0||`; the true residual is computed at
//! the end of every cycle.

mod driver;
mod givens;
mod precond;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use givens::{givens_update, solve_least_squares, GivensState};
pub use precond::{apply_preconditioner, PrecondKind, Preconditioner};

use crate::error::{Error, Result};
use crate::kernels::{CsrMatrix, KrylovBasis, ReductionLedger};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MgsL1,
    Cgs1Ghysels,
    Cgs2,
    TwoSyncCgs2,
    OneSyncMgs,
    Pipeline2,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::MgsL1,
        Method::Cgs1Ghysels,
        Method::Cgs2,
        Method::TwoSyncCgs2,
        Method::OneSyncMgs,
        Method::Pipeline2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::MgsL1 => "mgs_l1",
            Method::Cgs1Ghysels => "cgs1_ghysels",
            Method::Cgs2 => "cgs2",
            Method::TwoSyncCgs2 => "two_sync_cgs2",
            Method::OneSyncMgs => "one_sync_mgs",
            Method::Pipeline2 => "pipeline2",
        }
    }

    /// Short name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            Method::MgsL1 => "mgs-l1",
            Method::Cgs1Ghysels => "cgs1-ghysels",
            Method::Cgs2 => "cgs2",
            Method::TwoSyncCgs2 => "two-sync",
            Method::OneSyncMgs => "one-sync",
            Method::Pipeline2 => "pipeline2",
        }
    }

    /// Reductions attributed to the `i`-th iteration of a cycle (1-based).
    pub fn reductions_per_iteration(self, i: usize) -> usize {
        match self {
            Method::MgsL1 => i + 1,
            Method::Cgs2 => 3,
            Method::TwoSyncCgs2 => 2,
            Method::Cgs1Ghysels | Method::OneSyncMgs | Method::Pipeline2 => 1,
        }
    }

    /// Methods whose Arnoldi step normalizes one column late.
    pub fn is_lagged(self) -> bool {
        matches!(self, Method::TwoSyncCgs2 | Method::OneSyncMgs | Method::Pipeline2)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.cli_name() == key || m.as_str().replace('_', "-") == key)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.cli_name()).collect();
                Error::InvalidConfig(format!("unknown method `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmresConfig {
    pub restart_m: usize,
    /// Restarts after the first cycle; at most `max_restarts + 1` cycles run.
    pub max_restarts: usize,
    pub rel_tol: f64,
    pub method: Method,
    pub precond: PrecondKind,
    /// Multiplies the happy-breakdown threshold `eps * sqrt(n) * ||a||`.
    pub breakdown_tol_factor: f64,
    /// Evaluate `||S||_2` and `||I - Q^T Q||_2` every this many iterations
    /// (0 disables). Computed outside the ledger.
    pub diag_every: usize,
}

impl GmresConfig {
    pub fn new(method: Method) -> Self {
        Self {
            restart_m: 30,
            max_restarts: 20,
            rel_tol: 1e-6,
            method,
            precond: PrecondKind::None,
            breakdown_tol_factor: 1.0,
            diag_every: 1,
        }
    }

    pub fn with_restart(mut self, m: usize) -> Self {
        self.restart_m = m;
        self
    }

    pub fn with_max_restarts(mut self, k: usize) -> Self {
        self.max_restarts = k;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_precond(mut self, precond: PrecondKind) -> Self {
        self.precond = precond;
        self
    }

    pub fn with_breakdown_factor(mut self, factor: f64) -> Self {
        self.breakdown_tol_factor = factor;
        self
    }

    pub fn with_diag_every(mut self, k: usize) -> Self {
        self.diag_every = k;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restart_m == 0 {
            return Err(Error::InvalidConfig("restart length must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "relative tolerance must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.breakdown_tol_factor >= 0.0 && self.breakdown_tol_factor.is_finite()) {
            return Err(Error::InvalidConfig("breakdown factor must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    StalledMaxiter,
    Breakdown,
    CancellationFailure,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Converged => "converged",
            Outcome::StalledMaxiter => "stalled_maxiter",
            Outcome::Breakdown => "breakdown",
            Outcome::CancellationFailure => "cancellation_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Global iteration number, starting at 1.
    pub iter: usize,
    /// Restart cycle, starting at 0.
    pub cycle: usize,
    /// Givens residual divided by `||b - A x0||`.
    pub implicit_rel_res: f64,
    /// True relative residual, present on the last iteration of each cycle.
    pub true_rel_res: Option<f64>,
    pub s_norm: Option<f64>,
    pub orth_loss: Option<f64>,
    /// Ledger events attributed to this iteration.
    pub reductions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceHistory {
    pub records: Vec<IterationRecord>,
    pub outcome: Outcome,
    /// `||b - A x0||`.
    pub initial_residual: f64,
    pub final_true_rel_res: f64,
}

impl ConvergenceHistory {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn implicit_residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.implicit_rel_res).collect()
    }

    /// First iteration with `||S||_2 >= 0.99`.
    pub fn stall_iteration(&self) -> Option<usize> {
        crate::diagnostics::stall_iteration(
            self.records.iter().filter_map(|r| r.s_norm.map(|s| (r.iter, s))),
        )
    }

    pub fn max_s_norm(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.s_norm).reduce(f64::max)
    }

    pub fn min_implicit(&self) -> Option<f64> {
        self.records.iter().map(|r| r.implicit_rel_res).reduce(f64::min)
    }
}

/// Arnoldi data of the last cycle: `V` (`k + 1` columns) and the
/// `(k + 1) x k` Hessenberg matrix before rotation, satisfying
/// `A M^{-1} V_k = V_{k+1} H_bar` up to rounding.
#[derive(Debug, Clone)]
pub struct ArnoldiData {
    pub basis: KrylovBasis,
    pub h_bar: DMatrix<f64>,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub history: ConvergenceHistory,
    pub arnoldi: Option<ArnoldiData>,
}

/// Solves `A x = b` with restarted GMRES using `config.method`.
pub fn solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    config: &GmresConfig,
    ledger: &mut ReductionLedger,
) -> Result<Solution> {
    driver::solve(a, b, x0, config, ledger)
}

macro_rules! named_solver {
    ($(#[$doc:meta])* $name:ident, $method:expr) => {
        $(#[$doc])*
        pub fn $name(
            a: &CsrMatrix,
            b: &[f64],
            x0: Option<&[f64]>,
            config: &GmresConfig,
            ledger: &mut ReductionLedger,
        ) -> Result<Solution> {
            solve(a, b, x0, &config.clone().with_method($method), ledger)
        }
    };
}

named_solver!(
    /// Modified Gram-Schmidt GMRES: one scalar reduction per basis vector.
    gmres_mgs_l1,
    Method::MgsL1
);
named_solver!(
    /// GMRES with two-pass classical Gram-Schmidt.
    gmres_cgs2,
    Method::Cgs2
);
named_solver!(
    /// One-pass classical Gram-Schmidt with the norm taken from the same
    /// reduction as the projections. Fails by cancellation once orthogonality
    /// degrades.
    gmres_cgs1_ghysels,
    Method::Cgs1Ghysels
);
named_solver!(
    /// Lagged level-2 CGS2 GMRES, two reductions per iteration.
    gmres_two_sync,
    Method::TwoSyncCgs2
);
named_solver!(
    /// Lagged level-2 MGS GMRES, one reduction per iteration.
    gmres_one_sync,
    Method::OneSyncMgs
);
named_solver!(
    /// [`gmres_one_sync`] run on a depth-2 pipelined schedule.
    gmres_pipeline2,
    Method::Pipeline2
);
