//! Low-synchronization Gram-Schmidt and GMRES.
//!
//! The crate implements classical, modified, and level-2 (compact WY) Gram-Schmidt
//! kernels, the GMRES drivers built on them, and the instrumentation needed to
//! study them: every global reduction is logged in a [`ReductionLedger`], and
//! the [`diagnostics`] module measures loss of orthogonality.
//!
//! ```
//! use lowsync::gmres::{solve, GmresConfig, Method};
//! use lowsync::kernels::{CsrMatrix, ReductionLedger};
//!
//! let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0]);
//! let b = vec![1.0; 4];
//! let config = GmresConfig::new(Method::OneSyncMgs).with_tol(1e-12);
//! let mut ledger = ReductionLedger::new();
//! let sol = solve(&a, &b, None, &config, &mut ledger).unwrap();
//! assert!((sol.x[3] - 0.25).abs() < 1e-10);
//! ```
//!
//! [`ReductionLedger`]: kernels::ReductionLedger

pub mod diagnostics;
pub mod error;
pub mod gmres;
pub mod gram_schmidt;
pub mod harness;
pub mod kernels;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/reductions.md")]
    mod reductions {}
    #[doc = include_str!("../../../book/src/gram-schmidt.md")]
    mod gram_schmidt {}
    #[doc = include_str!("../../../book/src/compact-wy.md")]
    mod compact_wy {}
    #[doc = include_str!("../../../book/src/gmres.md")]
    mod gmres {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
