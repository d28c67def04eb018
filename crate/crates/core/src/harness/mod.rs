//! Problem generators, Matrix Market input, and the experiment runner used by
//! the command-line tool.

mod experiment;
pub mod mtx;
pub mod plot;
pub mod problems;

pub use experiment::{
    exit_code, run_experiment, write_history_csv, ConfigEcho, ExperimentReport, ExperimentSpec,
    ProblemSpec, Summary, AUTO_DIAGNOSTICS_MAX_N,
};
pub use mtx::{load_matrix_market, read_matrix_market};
pub use plot::{emit_plot_data, load_plot_data, parse_plot_data, write_plot_data, PlotData};
