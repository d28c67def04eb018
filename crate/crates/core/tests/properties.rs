use lowsync::diagnostics::{paige_metric, spectral_norm_small};
use lowsync::gmres::{solve, GivensState, GmresConfig, Method};
use lowsync::gram_schmidt::{factor, GsKernel};
use lowsync::harness::problems::{gen_rhs, random_dense_system, standard_normal, RhsSpec};
use lowsync::kernels::{
    dot, fused_mdot_norm, mass_inner_product, maxpy, norm2, spmv, Columns, CsrMatrix, ReductionLedger,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const EPS: f64 = f64::EPSILON;

fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    DMatrix::from_vec(rows, cols, standard_normal(rows * cols, seed))
}

fn column_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.as_slice().to_vec()
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Mdot,
    Norm,
    Dot,
    Fused,
    Spmv,
    Maxpy,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        Just(Op::Mdot),
        Just(Op::Norm),
        Just(Op::Dot),
        Just(Op::Fused),
        Just(Op::Spmv),
        Just(Op::Maxpy)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ledger_counts_only_reductions(ops in prop::collection::vec(op(), 0..40), seed in any::<u64>()) {
        let n = 7;
        let q = column_major(&gaussian(n, 3, seed));
        let cols = Columns::new(n, &q);
        let x = standard_normal(n, seed ^ 1);
        let a = random_dense_system(n, 1.0, seed);
        let mut ledger = ReductionLedger::new();
        let mut expected = 0;
        for op in &ops {
            let before = ledger.len();
            match op {
                Op::Mdot => { mass_inner_product(cols, &x, &mut ledger).unwrap(); }
                Op::Norm => { norm2(&x, &mut ledger).unwrap(); }
                Op::Dot => { dot(&x, &x, &mut ledger).unwrap(); }
                Op::Fused => { fused_mdot_norm(cols, &x, &x, &mut ledger).unwrap(); }
                Op::Spmv => { spmv(&a, &x).unwrap(); }
                Op::Maxpy => { maxpy(&x, cols, &[1.0, -2.0, 0.5]).unwrap(); }
            }
            let step = usize::from(!matches!(op, Op::Spmv | Op::Maxpy));
            prop_assert_eq!(ledger.len() - before, step);
            expected += step;
        }
        prop_assert_eq!(ledger.len(), expected);
    }

    #[test]
    fn spmv_matches_dense_oracle(n in 1usize..=50, density in 0.05f64..1.0, seed in any::<u64>()) {
        let vals = standard_normal(n * n, seed);
        let mask = standard_normal(n * n, seed.wrapping_add(7));
        let keep = |k: usize| mask[k].abs() < density * 3.0;
        let triplets: Vec<_> = (0..n * n).filter(|&k| keep(k)).map(|k| (k / n, k % n, vals[k])).collect();
        let a = CsrMatrix::from_triplets(n, n, &triplets).unwrap();
        let dense = DMatrix::from_fn(n, n, |i, j| if keep(i * n + j) { vals[i * n + j] } else { 0.0 });
        let x = standard_normal(n, seed ^ 0xabc);
        let y = spmv(&a, &x).unwrap();
        let y_ref = &dense * DVector::from_column_slice(&x);
        let bound = 8.0 * EPS * dense.norm() * DVector::from_column_slice(&x).norm();
        for i in 0..n {
            prop_assert!((y[i] - y_ref[i]).abs() <= bound);
        }
    }

    #[test]
    fn maxpy_matches_sequential_axpy(n in 1usize..30, p in 0usize..8, seed in any::<u64>()) {
        let q = column_major(&gaussian(n, p, seed));
        let cols = Columns::new(n, &q);
        let y = standard_normal(n, seed ^ 3);
        let alpha = standard_normal(p, seed ^ 5);
        let out = maxpy(&y, cols, &alpha).unwrap();
        for i in 0..n {
            let mut acc = y[i];
            let mut mag = y[i].abs();
            for k in 0..p {
                acc += alpha[k] * q[k * n + i];
                mag += (alpha[k] * q[k * n + i]).abs();
            }
            prop_assert!((out[i] - acc).abs() <= 8.0 * EPS * mag);
        }
    }

    #[test]
    fn kernel_sync_counts(p in 1usize..12, seed in any::<u64>()) {
        let n = 20;
        let g = gaussian(n, p, seed);
        let cols: Vec<Vec<f64>> = (0..p).map(|j| g.column(j).iter().copied().collect()).collect();
        for kernel in GsKernel::ALL {
            let mut ledger = ReductionLedger::new();
            factor(kernel, n, &cols, &mut ledger).unwrap();
            // The first column has no basis to project against: its norm only.
            let rest = p - 1;
            let expected = match kernel {
                GsKernel::Classical { passes } => 1 + rest * (passes + 1),
                GsKernel::ModifiedLevel1 => p * (p + 1) / 2,
                GsKernel::Cgs2TwoSync => 1 + 2 * rest,
                GsKernel::MgsLevel2 => rest + 1,
                GsKernel::Cgs2Level2 => 2 * rest + 1,
            };
            prop_assert_eq!(ledger.len(), expected, "{}", kernel.name());
        }
    }

    #[test]
    fn paige_metric_of_orthonormal_columns(p in 1usize..=50, extra in 0usize..20, seed in any::<u64>()) {
        let q = gaussian(p + extra, p, seed).qr().q();
        let data = column_major(&q);
        let s = paige_metric(Columns::new(p + extra, &data));
        prop_assert!(s <= 10.0 * EPS * p as f64, "p={} s={:e}", p, s);
    }

    #[test]
    fn paige_metric_ignores_column_signs(p in 1usize..12, flips in any::<u16>(), seed in any::<u64>()) {
        let n = 30;
        let mut g = gaussian(n, p, seed);
        // Normalize and mildly perturb an orthonormal set so S is non-trivial.
        let q = g.clone().qr().q();
        g = &q + g * 1e-3;
        for mut c in g.column_iter_mut() {
            let norm = c.norm();
            c /= norm;
        }
        let base = paige_metric(Columns::new(n, g.as_slice()));
        for j in 0..p {
            if flips >> j & 1 == 1 {
                g.column_mut(j).neg_mut();
            }
        }
        let flipped = paige_metric(Columns::new(n, g.as_slice()));
        prop_assert!((base - flipped).abs() <= 1e-10 * base.max(EPS), "{:e} vs {:e}", base, flipped);
    }

    #[test]
    fn spectral_norm_dominates_column_norms(rows in 1usize..15, p in 1usize..15, seed in any::<u64>()) {
        let m = gaussian(rows, p, seed);
        let max_col = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        let s = spectral_norm_small(&m);
        prop_assert!(s >= max_col / (p as f64).sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn givens_residual_is_monotone(steps in 1usize..15, beta in 0.1f64..10.0, seed in any::<u64>()) {
        let raw = standard_normal(steps * (steps + 1), seed);
        let mut g = GivensState::new(beta);
        let mut last = beta;
        for j in 0..steps {
            let col = &raw[j * (steps + 1)..j * (steps + 1) + j + 2];
            let res = g.update(col).unwrap();
            let (c, s) = g.rotations()[j];
            prop_assert!((c * c + s * s - 1.0).abs() <= 4.0 * EPS);
            prop_assert!(res <= last * (1.0 + 4.0 * EPS));
            last = res;
        }
    }

    #[test]
    fn gmres_implicit_residual_monotone_per_cycle(n in 5usize..40, m in 2usize..12, seed in any::<u64>()) {
        let a = random_dense_system(n, 2.0, seed);
        let b = gen_rhs(RhsSpec::Random { seed }, &a).unwrap();
        for method in Method::ALL {
            let config = GmresConfig::new(method).with_restart(m).with_max_restarts(3).with_tol(1e-10).with_diag_every(0);
            let mut ledger = ReductionLedger::new();
            let sol = solve(&a, &b, None, &config, &mut ledger).unwrap();
            for w in sol.history.records.windows(2) {
                if w[0].cycle == w[1].cycle {
                    prop_assert!(w[1].implicit_rel_res <= w[0].implicit_rel_res * (1.0 + 1e-12), "{}", method);
                }
            }
        }
    }
}
