use crate::error::{check_len, Result};
use crate::kernels::{KrylovBasis, ReductionLedger};

use super::{
    cgs2_lvl2, cgs2_two_sync, cgs_iterated, finish_lagged, mgs_level1, mgs_lvl2, FactorState,
    NewColumn,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsKernel {
    /// Classical Gram-Schmidt with the given number of passes (1 = CGS-1, 2 = CGS-2).
    Classical { passes: usize },
    ModifiedLevel1,
    Cgs2TwoSync,
    MgsLevel2,
    Cgs2Level2,
}

impl GsKernel {
    pub const ALL: [GsKernel; 6] = [
        GsKernel::Classical { passes: 1 },
        GsKernel::Classical { passes: 2 },
        GsKernel::ModifiedLevel1,
        GsKernel::Cgs2TwoSync,
        GsKernel::MgsLevel2,
        GsKernel::Cgs2Level2,
    ];

    pub fn name(self) -> String {
        match self {
            GsKernel::Classical { passes } => format!("cgs{passes}"),
            GsKernel::ModifiedLevel1 => "mgs".into(),
            GsKernel::Cgs2TwoSync => "cgs2-two-sync".into(),
            GsKernel::MgsLevel2 => "mgs-lvl2".into(),
            GsKernel::Cgs2Level2 => "cgs2-lvl2".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: KrylovBasis,
    pub state: FactorState,
}

impl QrFactors {
    pub fn r_dense(&self) -> Vec<Vec<f64>> {
        self.state.r_dense(self.q.n_cols())
    }
}

/// Column-by-column QR factorization of `columns` (each of length `n`) with the
/// chosen kernel. Breakdown on a dependent column is returned as an error.
pub fn factor(
    kernel: GsKernel,
    n: usize,
    columns: &[Vec<f64>],
    ledger: &mut ReductionLedger,
) -> Result<QrFactors> {
    let p = columns.len();
    for c in columns {
        check_len("factor column", n, c.len())?;
    }
    let mut q = KrylovBasis::new(n, p.max(1));
    let mut state = FactorState::new(p.max(1));
    match kernel {
        GsKernel::MgsLevel2 | GsKernel::Cgs2Level2 => {
            if let Some(first) = columns.first() {
                q.push(first)?;
                for col in &columns[1..] {
                    q.push(col)?;
                    if kernel == GsKernel::MgsLevel2 {
                        mgs_lvl2(&mut q, &mut state, NewColumn::Independent, ledger)?;
                    } else {
                        cgs2_lvl2(&mut q, &mut state, NewColumn::Independent, ledger)?;
                    }
                }
                finish_lagged(&mut q, &mut state, ledger)?;
            }
        }
        _ => {
            for (j, col) in columns.iter().enumerate() {
                let out = {
                    let head = q.leading(j);
                    match kernel {
                        GsKernel::Classical { passes } => {
                            cgs_iterated(head, col, passes, &mut state, ledger)?
                        }
                        GsKernel::ModifiedLevel1 => mgs_level1(head, col, &mut state, ledger)?,
                        GsKernel::Cgs2TwoSync => cgs2_two_sync(head, &mut state, col, ledger)?,
                        GsKernel::MgsLevel2 | GsKernel::Cgs2Level2 => unreachable!(),
                    }
                };
                q.push(&out.q)?;
                q.set_normalized(j + 1);
            }
        }
    }
    Ok(QrFactors { q, state })
}
