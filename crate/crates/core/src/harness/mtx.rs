//! Matrix Market coordinate reader (real, general or symmetric).

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernels::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::MatrixMarket {
        line,
        message: message.into(),
    }
}

fn parse_banner(line: &str) -> Result<Symmetry> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    if tokens[1] != "matrix" {
        return Err(parse_err(1, format!("unsupported object `{}`", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format `{}`, only coordinate is read", tokens[2])));
    }
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        "complex" => return Err(parse_err(1, "complex matrices are not supported")),
        "pattern" => return Err(parse_err(1, "pattern matrices carry no values and are not supported")),
        other => return Err(parse_err(1, format!("unknown field `{other}`"))),
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        other => Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    }
}

fn parse_index(tok: Option<&str>, bound: usize, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing index"))?;
    let i: usize = tok
        .parse()
        .map_err(|_| parse_err(line, format!("bad index `{tok}`")))?;
    if i == 0 || i > bound {
        return Err(parse_err(line, format!("index {i} outside 1..={bound}")));
    }
    Ok(i - 1)
}

/// Parses Matrix Market text. Symmetric files are expanded to both triangles
/// and duplicate entries are summed.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<CsrMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let banner = match lines.next() {
        Some((_, l)) => l.map_err(|e| parse_err(1, e.to_string()))?,
        None => return Err(parse_err(1, "empty input")),
    };
    let symmetry = parse_banner(&banner)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut entries = 0usize;
    for (lineno, line) in lines {
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let mut tok = text.split_whitespace();
        let Some((rows, cols, nnz)) = size else {
            let mut dims = [0usize; 3];
            for d in &mut dims {
                let t = tok.next().ok_or_else(|| parse_err(lineno, "size line needs rows, cols, nnz"))?;
                *d = t
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad size entry `{t}`")))?;
            }
            if symmetry == Symmetry::Symmetric && dims[0] != dims[1] {
                return Err(parse_err(lineno, "symmetric matrix must be square"));
            }
            size = Some((dims[0], dims[1], dims[2]));
            triplets.reserve(if symmetry == Symmetry::Symmetric { 2 * dims[2] } else { dims[2] });
            continue;
        };
        if entries == nnz {
            return Err(parse_err(lineno, format!("more than the declared {nnz} entries")));
        }
        let i = parse_index(tok.next(), rows, lineno)?;
        let j = parse_index(tok.next(), cols, lineno)?;
        let vt = tok.next().ok_or_else(|| parse_err(lineno, "missing value"))?;
        let v: f64 = vt
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad value `{vt}`")))?;
        if tok.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens after value"));
        }
        triplets.push((i, j, v));
        if symmetry == Symmetry::Symmetric && i != j {
            triplets.push((j, i, v));
        }
        entries += 1;
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if entries != nnz {
        return Err(parse_err(0, format!("declared {nnz} entries, found {entries}")));
    }
    CsrMatrix::from_triplets(rows, cols, &triplets)
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix_market(BufReader::new(file))
}
