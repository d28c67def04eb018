//! gnuplot data files: `iter rel_res s_norm`, one row per iteration.
//!
//! Missing `s_norm` values are written as `NaN`, which gnuplot skips.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gmres::ConvergenceHistory;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub method: String,
    pub problem: String,
    /// `(iter, rel_res, s_norm)`.
    pub rows: Vec<(usize, f64, Option<f64>)>,
}

pub fn write_plot_data<W: Write>(
    mut out: W,
    history: &ConvergenceHistory,
    method: &str,
    problem: &str,
) -> std::io::Result<()> {
    writeln!(out, "# method: {method}")?;
    writeln!(out, "# problem: {problem}")?;
    writeln!(out, "# iter rel_res s_norm")?;
    for r in &history.records {
        let s = r.s_norm.unwrap_or(f64::NAN);
        writeln!(out, "{} {:e} {:e}", r.iter, r.implicit_rel_res, s)?;
    }
    out.flush()
}

pub fn emit_plot_data(
    history: &ConvergenceHistory,
    method: &str,
    problem: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_plot_data(BufWriter::new(file), history, method, problem).map_err(|e| Error::io(path, e))
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::InvalidConfig(format!("plot data line {line}: {}", message.into()))
}

pub fn parse_plot_data<R: BufRead>(reader: R) -> Result<PlotData> {
    let mut data = PlotData {
        method: String::new(),
        problem: String::new(),
        rows: Vec::new(),
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| bad(i + 1, e.to_string()))?;
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(m) = comment.strip_prefix("method:") {
                data.method = m.trim().to_string();
            } else if let Some(p) = comment.strip_prefix("problem:") {
                data.problem = p.trim().to_string();
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() != 3 {
            return Err(bad(i + 1, format!("expected 3 columns, found {}", cols.len())));
        }
        let iter = cols[0].parse().map_err(|_| bad(i + 1, "bad iteration"))?;
        let res = cols[1].parse().map_err(|_| bad(i + 1, "bad residual"))?;
        let s: f64 = cols[2].parse().map_err(|_| bad(i + 1, "bad s_norm"))?;
        data.rows.push((iter, res, (!s.is_nan()).then_some(s)));
    }
    Ok(data)
}

pub fn load_plot_data(path: impl AsRef<Path>) -> Result<PlotData> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_plot_data(BufReader::new(file))
}
