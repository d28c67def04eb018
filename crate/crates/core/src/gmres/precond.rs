use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::CsrMatrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecondKind {
    #[default]
    None,
    Jacobi,
}

impl PrecondKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PrecondKind::None => "none",
            PrecondKind::Jacobi => "jacobi",
        }
    }
}

impl std::str::FromStr for PrecondKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PrecondKind::None),
            "jacobi" => Ok(PrecondKind::Jacobi),
            other => Err(Error::InvalidConfig(format!("unknown preconditioner `{other}`"))),
        }
    }
}

/// Right preconditioner `M^{-1}`; the solver works with `A M^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Preconditioner {
    Identity,
    /// Stores `1 / diag(A)`.
    Jacobi(Vec<f64>),
}

impl Preconditioner {
    pub fn new(kind: PrecondKind, a: &CsrMatrix) -> Result<Self> {
        match kind {
            PrecondKind::None => Ok(Preconditioner::Identity),
            PrecondKind::Jacobi => {
                let diag = a.diagonal();
                if let Some(row) = diag.iter().position(|&d| d == 0.0) {
                    return Err(Error::ZeroDiagonal { row });
                }
                Ok(Preconditioner::Jacobi(diag.iter().map(|d| 1.0 / d).collect()))
            }
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Preconditioner::Identity => v.to_vec(),
            Preconditioner::Jacobi(inv) => v.iter().zip(inv).map(|(x, d)| x * d).collect(),
        }
    }
}

pub fn apply_preconditioner(p: &Preconditioner, v: &[f64]) -> Vec<f64> {
    p.apply(v)
}
