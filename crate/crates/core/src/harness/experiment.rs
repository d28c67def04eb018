use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mtx::load_matrix_market;
use super::plot::emit_plot_data;
use super::problems::{gen_laplace2d, gen_rhs, gen_simoncini, RhsSpec, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::gmres::{solve, ConvergenceHistory, GmresConfig, Outcome, Solution};
use crate::kernels::{CsrMatrix, ReductionKind, ReductionLedger};

/// Largest system for which diagnostics run by default.
pub const AUTO_DIAGNOSTICS_MAX_N: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    MtxFile { path: PathBuf },
    Simoncini { n: usize, first: f64 },
    Laplace2d { nx: usize },
}

impl ProblemSpec {
    pub fn build(&self) -> Result<CsrMatrix> {
        match self {
            ProblemSpec::MtxFile { path } => load_matrix_market(path),
            ProblemSpec::Simoncini { n, first } => Ok(gen_simoncini(*n, *first)),
            ProblemSpec::Laplace2d { nx } => Ok(gen_laplace2d(*nx)),
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::MtxFile { path } => write!(f, "{}", path.display()),
            ProblemSpec::Simoncini { n, first } => write!(f, "simoncini({n}, {first:e})"),
            ProblemSpec::Laplace2d { nx } => write!(f, "laplace2d({nx})"),
        }
    }
}

/// Parses `simoncini`, `simoncini:<n>`, `simoncini:<n>,<first>`, or
/// `laplace2d:<nx>`.
impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let args: Vec<&str> = args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
        let bad = |what: &str| Error::InvalidConfig(format!("problem `{s}`: {what}"));
        match name {
            "simoncini" => {
                if args.len() > 2 {
                    return Err(bad("expected simoncini[:n[,first]]"));
                }
                let n = match args.first() {
                    Some(a) => a.parse().map_err(|_| bad("n must be a positive integer"))?,
                    None => 100,
                };
                let first = match args.get(1) {
                    Some(a) => a.parse().map_err(|_| bad("first must be a number"))?,
                    None => 1e-8,
                };
                if n == 0 {
                    return Err(bad("n must be positive"));
                }
                Ok(ProblemSpec::Simoncini { n, first })
            }
            "laplace2d" => match args.as_slice() {
                [nx] => {
                    let nx = nx.parse().map_err(|_| bad("nx must be a positive integer"))?;
                    if nx == 0 {
                        return Err(bad("nx must be positive"));
                    }
                    Ok(ProblemSpec::Laplace2d { nx })
                }
                _ => Err(bad("expected laplace2d:<nx>")),
            },
            _ => Err(bad("unknown problem (expected simoncini or laplace2d)")),
        }
    }
}

/// Parses `ones-image`, `random`, or `random:<seed>`.
impl FromStr for RhsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "ones-image" || s == "ones_image" => Ok(RhsSpec::OnesImage),
            None if s == "random" => Ok(RhsSpec::Random { seed: DEFAULT_SEED }),
            Some(("random", seed)) => seed
                .parse()
                .map(|seed| RhsSpec::Random { seed })
                .map_err(|_| Error::InvalidConfig(format!("bad seed `{seed}`"))),
            _ => Err(Error::InvalidConfig(format!(
                "unknown rhs `{s}` (expected ones-image or random:<seed>)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub rhs: RhsSpec,
    /// `solver.diag_every` is replaced by `diagnostics_every` when that is set,
    /// or by the size-based default otherwise.
    pub solver: GmresConfig,
    pub diagnostics_every: Option<usize>,
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
    pub plot_path: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(problem: ProblemSpec, rhs: RhsSpec, solver: GmresConfig) -> Self {
        Self {
            problem,
            rhs,
            solver,
            diagnostics_every: None,
            csv_path: None,
            json_path: None,
            plot_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub problem: ProblemSpec,
    pub rhs: RhsSpec,
    pub n: usize,
    pub nnz: usize,
    pub method: String,
    pub restart: usize,
    pub max_restarts: usize,
    pub tol: f64,
    pub precond: String,
    pub diag_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub outcome: Outcome,
    pub iterations: usize,
    pub total_reductions: usize,
    pub reductions_by_kind: BTreeMap<String, usize>,
    pub stall_iteration: Option<usize>,
    pub final_true_rel_res: f64,
    pub min_implicit_rel_res: Option<f64>,
    pub max_s_norm: Option<f64>,
    /// Seed of the random right-hand side, if one was drawn.
    pub seed: Option<u64>,
    pub config: ConfigEcho,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub solution: Solution,
    pub ledger: ReductionLedger,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn exit_code(&self) -> i32 {
        exit_code(self.summary.outcome)
    }
}

/// Process exit code for an outcome: 0 converged, 2 stalled, 3 breakdown.
pub fn exit_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Converged => 0,
        Outcome::StalledMaxiter => 2,
        Outcome::Breakdown | Outcome::CancellationFailure => 3,
    }
}

#[derive(Serialize)]
struct CsvRow {
    iter: usize,
    implicit_rel_res: f64,
    true_rel_res: Option<f64>,
    s_norm: Option<f64>,
    orth_loss: Option<f64>,
    reductions: usize,
}

/// Writes one row per iteration with columns `iter, implicit_rel_res,
/// true_rel_res, s_norm, orth_loss, reductions`; absent values are empty.
pub fn write_history_csv<W: Write>(out: W, history: &ConvergenceHistory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if history.records.is_empty() {
        w.write_record(["iter", "implicit_rel_res", "true_rel_res", "s_norm", "orth_loss", "reductions"])?;
    }
    for r in &history.records {
        w.serialize(CsvRow {
            iter: r.iter,
            implicit_rel_res: r.implicit_rel_res,
            true_rel_res: r.true_rel_res,
            s_norm: r.s_norm,
            orth_loss: r.orth_loss,
            reductions: r.reductions,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let a = spec.problem.build()?;
    let b = gen_rhs(spec.rhs, &a)?;
    let diag_every = spec.diagnostics_every.unwrap_or(if a.n_rows() <= AUTO_DIAGNOSTICS_MAX_N {
        1
    } else {
        0
    });
    let config = spec.solver.clone().with_diag_every(diag_every);
    let mut ledger = ReductionLedger::new();
    let solution = solve(&a, &b, None, &config, &mut ledger)?;
    let history = &solution.history;

    let by_kind = ledger.count_by_kind();
    let summary = Summary {
        outcome: history.outcome,
        iterations: history.iterations(),
        total_reductions: ledger.len(),
        reductions_by_kind: ReductionKind::ALL
            .iter()
            .map(|k| (k.as_str().to_string(), by_kind.get(k).copied().unwrap_or(0)))
            .collect(),
        stall_iteration: history.stall_iteration(),
        final_true_rel_res: history.final_true_rel_res,
        min_implicit_rel_res: history.min_implicit(),
        max_s_norm: history.max_s_norm(),
        seed: match spec.rhs {
            RhsSpec::Random { seed } => Some(seed),
            RhsSpec::OnesImage => None,
        },
        config: ConfigEcho {
            problem: spec.problem.clone(),
            rhs: spec.rhs,
            n: a.n_rows(),
            nnz: a.nnz(),
            method: config.method.cli_name().to_string(),
            restart: config.restart_m,
            max_restarts: config.max_restarts,
            tol: config.rel_tol,
            precond: config.precond.as_str().to_string(),
            diag_every,
        },
    };

    if let Some(path) = &spec.csv_path {
        write_history_csv(create(path)?, history)?;
    }
    if let Some(path) = &spec.json_path {
        let mut out = create(path)?;
        serde_json::to_writer_pretty(&mut out, &summary)?;
        writeln!(out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &spec.plot_path {
        emit_plot_data(history, config.method.cli_name(), &spec.problem.to_string(), path)?;
    }

    Ok(ExperimentReport {
        solution,
        ledger,
        summary,
    })
}
