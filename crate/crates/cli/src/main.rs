use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{ArgGroup, Parser};
use lowsync::gmres::{GmresConfig, Method, PrecondKind};
use lowsync::harness::problems::RhsSpec;
use lowsync::harness::{run_experiment, ExperimentSpec, ProblemSpec};

/// Run restarted GMRES on a Matrix Market file or a built-in problem and
/// report convergence and global-reduction counts.
///
/// Exit status: 0 converged, 2 stalled or out of iterations, 3 breakdown or
/// cancellation, 1 usage or input error.
#[derive(Debug, Parser)]
#[command(name = "lowsync", version)]
#[command(group(ArgGroup::new("source").required(true).args(["matrix", "problem"])))]
struct Args {
    /// Matrix Market file (coordinate, real, general or symmetric)
    #[arg(long, value_name = "PATH")]
    matrix: Option<PathBuf>,

    /// Built-in problem: simoncini[:n[,first]] or laplace2d:<nx>
    #[arg(long, value_name = "SPEC")]
    problem: Option<ProblemSpec>,

    /// Right-hand side: random:<seed> (unit norm) or ones-image (b = A * ones)
    #[arg(long, default_value = "random:42")]
    rhs: RhsSpec,

    /// mgs-l1, cgs2, cgs1-ghysels, two-sync, one-sync, or pipeline2
    #[arg(long, default_value = "one-sync")]
    method: Method,

    /// Restart length m
    #[arg(long, default_value_t = 30, value_name = "M")]
    restart: usize,

    /// Restarts after the first cycle
    #[arg(long, default_value_t = 20, value_name = "K")]
    max_restarts: usize,

    /// Relative residual tolerance
    #[arg(long, default_value_t = 1e-6, value_name = "T")]
    tol: f64,

    /// none or jacobi (applied on the right)
    #[arg(long, default_value = "none")]
    precond: PrecondKind,

    /// Per-iteration history as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Run summary as JSON
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,

    /// gnuplot data file (iter, rel_res, s_norm)
    #[arg(long, value_name = "PATH")]
    plot: Option<PathBuf>,

    /// Orthogonality diagnostics every K iterations, 0 to disable
    /// [default: 1 when n <= 2000, else 0]
    #[arg(long, value_name = "K")]
    diag_every: Option<usize>,
}

impl Args {
    fn spec(self) -> ExperimentSpec {
        let problem = match (self.matrix, self.problem) {
            (Some(path), _) => ProblemSpec::MtxFile { path },
            (None, Some(p)) => p,
            (None, None) => unreachable!("clap enforces one problem source"),
        };
        let solver = GmresConfig::new(self.method)
            .with_restart(self.restart)
            .with_max_restarts(self.max_restarts)
            .with_tol(self.tol)
            .with_precond(self.precond);
        ExperimentSpec {
            problem,
            rhs: self.rhs,
            solver,
            diagnostics_every: self.diag_every,
            csv_path: self.csv,
            json_path: self.json,
            plot_path: self.plot,
        }
    }
}

fn run(args: Args) -> anyhow::Result<i32> {
    let spec = args.spec();
    let report = run_experiment(&spec).with_context(|| format!("running {}", spec.problem))?;
    let s = &report.summary;
    println!(
        "{} on {} (n = {}, nnz = {})",
        s.config.method, spec.problem, s.config.n, s.config.nnz
    );
    println!("outcome             {}", s.outcome.as_str());
    println!("iterations          {}", s.iterations);
    println!("true rel. residual  {:.3e}", s.final_true_rel_res);
    if let Some(m) = s.min_implicit_rel_res {
        println!("min implicit        {m:.3e}");
    }
    if let Some(sn) = s.max_s_norm {
        println!("max ||S||_2         {sn:.3e}");
    }
    if let Some(k) = s.stall_iteration {
        println!("stall iteration     {k}");
    }
    let kinds: Vec<String> = s
        .reductions_by_kind
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(k, c)| format!("{k} {c}"))
        .collect();
    println!("reductions          {} ({})", s.total_reductions, kinds.join(", "));
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
