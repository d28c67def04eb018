use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value produced by {context} at index {index}")]
    NonFinite { context: &'static str, index: usize },

    #[error("invalid CSR structure: {0}")]
    InvalidCsr(String),

    #[error("basis capacity {capacity} exceeded")]
    CapacityExceeded { capacity: usize },

    /// The column being normalized has (numerically) vanished. `coeffs` holds the
    /// projection coefficients already computed for it, so callers such as GMRES
    /// can still finish the Hessenberg column with a zero subdiagonal.
    #[error("breakdown at column {column}: norm {norm:e} <= tolerance {tol:e}")]
    Breakdown {
        column: usize,
        coeffs: Vec<f64>,
        norm: f64,
        tol: f64,
    },

    #[error("singular triangular factor at row {row}")]
    SingularTriangular { row: usize },

    #[error("zero diagonal entry in row {row}; Jacobi preconditioner undefined")]
    ZeroDiagonal { row: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("right-hand side is zero")]
    ZeroRhs,

    #[error("Matrix Market parse error at line {line}: {message}")]
    MatrixMarket { line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

pub(crate) fn check_finite(context: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { context, index }),
        None => Ok(()),
    }
}
