use nalgebra::DMatrix;

use super::*;
use crate::diagnostics::{condition_number, orthogonality_loss, paige_metric};
use crate::harness::problems::{conditioned_columns, gen_simoncini, standard_normal};
use crate::kernels::{local_norm, spmv, KrylovBasis, ReductionKind, ReductionLedger};

const EPS: f64 = f64::EPSILON;

fn dense(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let n = cols[0].len();
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

fn basis(cols: &[Vec<f64>]) -> KrylovBasis {
    KrylovBasis::from_columns(cols[0].len(), cols).unwrap()
}

fn e(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn factor_loss(kernel: GsKernel, cols: &[Vec<f64>]) -> f64 {
    let mut ledger = ReductionLedger::new();
    let f = factor(kernel, cols[0].len(), cols, &mut ledger).unwrap();
    orthogonality_loss(f.q.all())
}

#[test]
fn cgs_trivial_and_event_count() {
    let mut ledger = ReductionLedger::new();
    let q = KrylovBasis::new(3, 2);
    let mut state = FactorState::new(2);
    let out = cgs_iterated(q.all(), &[0.0, 3.0, 0.0], 2, &mut state, &mut ledger).unwrap();
    assert_eq!(out.q, vec![0.0, 1.0, 0.0]);
    assert!(out.r.is_empty());
    assert_eq!(out.r_diag, 3.0);

    let q = basis(&[e(4, 0), e(4, 1)]);
    for passes in 1..=3 {
        let mut ledger = ReductionLedger::new();
        let mut state = FactorState::new(3);
        cgs_iterated(q.all(), &[1.0, 2.0, 3.0, 4.0], passes, &mut state, &mut ledger).unwrap();
        assert_eq!(ledger.len(), passes + 1);
    }
    assert!(cgs_iterated(q.all(), &[1.0; 4], 0, &mut FactorState::new(3), &mut ledger).is_err());
}

#[test]
fn cgs2_twice_is_enough() {
    let cols = conditioned_columns(30, 5, 1e8, 11);
    let mut ledger = ReductionLedger::new();
    let f = factor(GsKernel::Classical { passes: 2 }, 30, &cols[..4], &mut ledger).unwrap();
    let mut state = FactorState::new(5);
    let out = cgs_iterated(f.q.all(), &cols[4], 2, &mut state, &mut ledger).unwrap();
    let worst = f
        .q
        .all()
        .iter()
        .map(|qi| crate::kernels::local_dot(qi, &out.q).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 100.0 * EPS, "{worst:e}");
}

#[test]
fn mgs_level1_trivial_and_event_count() {
    let mut ledger = ReductionLedger::new();
    let q = basis(&[e(3, 0)]);
    let mut state = FactorState::new(2);
    let out = mgs_level1(q.all(), &[1.0, 1.0, 0.0], &mut state, &mut ledger).unwrap();
    assert_eq!(out.q, vec![0.0, 1.0, 0.0]);
    assert_eq!(out.r, vec![1.0]);
    assert_eq!(out.r_diag, 1.0);

    let q = basis(&(0..7).map(|i| e(9, i)).collect::<Vec<_>>());
    let mut ledger = ReductionLedger::new();
    mgs_level1(q.all(), &[1.0; 9], &mut FactorState::new(8), &mut ledger).unwrap();
    assert_eq!(ledger.len(), 8);
    let kinds = ledger.count_by_kind();
    assert_eq!(kinds[&ReductionKind::Dot], 7);
    assert_eq!(kinds[&ReductionKind::Norm], 1);
}

#[test]
fn mgs_level1_loss_is_linear_in_kappa() {
    for (seed, kappa) in [(3, 1e4), (4, 1e6), (5, 1e8)] {
        let cols = conditioned_columns(20, 6, kappa, seed);
        let measured = condition_number(&dense(&cols));
        let loss = factor_loss(GsKernel::ModifiedLevel1, &cols);
        assert!(loss <= 1e3 * EPS * measured, "kappa {kappa:e}: loss {loss:e}");
    }
}

#[test]
fn cgs2_two_sync_trivial_and_events() {
    let mut ledger = ReductionLedger::new();
    let q = basis(&[e(3, 0)]);
    let mut state = FactorState::new(2);
    let out = cgs2_two_sync(q.all(), &mut state, &[2.0, 2.0, 0.0], &mut ledger).unwrap();
    assert_eq!(out.r, vec![2.0]);
    assert_eq!(out.q, vec![0.0, 1.0, 0.0]);
    assert_eq!(out.r_diag, 2.0);
    assert_eq!(ledger.len(), 2);
    let kinds = ledger.count_by_kind();
    assert_eq!(kinds[&ReductionKind::Mdot], 1);
    assert_eq!(kinds[&ReductionKind::Norm], 1);
}

/// Arnoldi on the diagonal test matrix with the given kernel; returns the
/// largest `||S||_2` seen.
fn arnoldi_max_s(kernel: GsKernel, steps: usize) -> f64 {
    let a = gen_simoncini(100, 1e-8);
    let mut v0 = standard_normal(100, 42);
    let nv = local_norm(&v0);
    v0.iter_mut().for_each(|x| *x /= nv);
    let mut q = KrylovBasis::new(100, steps + 1);
    q.push(&v0).unwrap();
    let mut state = FactorState::new(steps + 1);
    let mut ledger = ReductionLedger::new();
    let mut worst: f64 = 0.0;
    for j in 0..steps {
        let w = spmv(&a, q.column(j)).unwrap();
        let out = match kernel {
            GsKernel::Cgs2TwoSync => cgs2_two_sync(q.all(), &mut state, &w, &mut ledger),
            GsKernel::Classical { passes } => {
                cgs_iterated(q.all(), &w, passes, &mut state, &mut ledger)
            }
            _ => unreachable!(),
        }
        .unwrap();
        q.push(&out.q).unwrap();
        worst = worst.max(paige_metric(q.all()));
    }
    worst
}

#[test]
fn cgs2_two_sync_keeps_krylov_basis_orthogonal() {
    let worst = arnoldi_max_s(GsKernel::Cgs2TwoSync, 40);
    assert!(worst <= 100.0 * EPS, "{worst:e}");
}

#[test]
fn mgs_lvl2_hand_example() {
    let mut v = KrylovBasis::new(3, 2);
    v.push(&[0.0, 2.0, 0.0]).unwrap();
    v.push(&[1.0, 1.0, 0.0]).unwrap();
    let mut state = FactorState::new(2);
    let mut ledger = ReductionLedger::new();
    let step = mgs_lvl2(&mut v, &mut state, NewColumn::Independent, &mut ledger).unwrap();
    assert_eq!(ledger.len(), 1);
    assert_eq!(ledger.events()[0].kind, ReductionKind::FusedMdotNorm);
    assert_eq!(step.normalized_column, 0);
    assert_eq!(v.column(0), &[0.0, 1.0, 0.0]);
    assert_eq!(state.r(0, 0), 2.0);
    assert_eq!(state.r(0, 1), 1.0);
    assert_eq!(v.column(1), &[1.0, 0.0, 0.0]);
    assert_eq!(v.normalized(), 1);

    let norm = finish_lagged(&mut v, &mut state, &mut ledger).unwrap();
    assert_eq!(norm, 1.0);
    assert_eq!(state.r(1, 1), 1.0);
    assert_eq!(state.t(0, 1), 0.0);
    assert_eq!(state.t(1, 1), 1.0);
    assert_eq!(ledger.len(), 2);
}

#[test]
fn lvl2_event_counts() {
    let cols = conditioned_columns(12, 6, 10.0, 1);
    for (kernel, per_call) in [(GsKernel::MgsLevel2, 1), (GsKernel::Cgs2Level2, 2)] {
        let mut ledger = ReductionLedger::new();
        factor(kernel, 12, &cols, &mut ledger).unwrap();
        // Five calls plus the closing normalization.
        assert_eq!(ledger.len(), 5 * per_call + 1, "{}", kernel.name());
    }
}

#[test]
fn mgs_lvl2_loss_matches_level1() {
    let cols = conditioned_columns(30, 10, 1e6, 21);
    let kappa = condition_number(&dense(&cols));
    let l1 = factor_loss(GsKernel::ModifiedLevel1, &cols);
    let l2 = factor_loss(GsKernel::MgsLevel2, &cols);
    assert!(l2 <= 1e3 * EPS * kappa, "{l2:e}");
    let (c1, c2) = (l1 / (EPS * kappa), l2 / (EPS * kappa));
    assert!(c2 <= 10.0 * c1.max(1.0) && c1 <= 10.0 * c2.max(1.0), "{c1} vs {c2}");
}

#[test]
fn cgs2_lvl2_fixed_point() {
    let mut v = KrylovBasis::new(4, 3);
    v.push(&[0.0, 3.0, 0.0, 0.0]).unwrap();
    v.push(&[2.0, 0.0, 0.0, 0.0]).unwrap();
    let mut state = FactorState::new(3);
    let mut ledger = ReductionLedger::new();
    cgs2_lvl2(&mut v, &mut state, NewColumn::Independent, &mut ledger).unwrap();
    assert_eq!(ledger.len(), 2);
    let moved: f64 = v
        .column(1)
        .iter()
        .zip([2.0, 0.0, 0.0, 0.0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(moved <= 4.0 * EPS * 2.0);
}

#[test]
fn cgs2_lvl2_orthogonal_at_extreme_kappa() {
    let cols = conditioned_columns(30, 10, 1e10, 8);
    let loss = factor_loss(GsKernel::Cgs2Level2, &cols);
    assert!(loss <= 100.0 * EPS, "{loss:e}");
}

#[test]
fn apply_t_identity_start() {
    let state = FactorState::new(4);
    let y = [1.0, -2.0, 3.0];
    assert_eq!(apply_t(&state, &y, TForm::CompactWy, false).unwrap(), y);
    assert_eq!(apply_t(&state, &y, TForm::CompactWy, true).unwrap(), y);
    assert_eq!(apply_t(&state, &y, TForm::Cgs2, false).unwrap(), y);
    assert!(apply_t(&state, &[0.0; 5], TForm::Cgs2, false).is_err());
}

#[test]
fn apply_t_matches_neumann_series() {
    for p in 1..=4 {
        let l = DMatrix::from_fn(p, p, |i, j| {
            if i > j {
                0.1 * (i + 2 * j + 1) as f64 - 0.25
            } else {
                0.0
            }
        });
        let mut state = FactorState::new(p);
        for k in 0..p {
            let s: Vec<f64> = (0..k).map(|j| l[(k, j)]).collect();
            state.extend_t(k, &s);
        }
        // (I + L)^{-1} = I - L + L^2 - L^3 exactly, L being nilpotent of order <= 4.
        let id = DMatrix::<f64>::identity(p, p);
        let series = &id - &l + &l * &l - &l * &l * &l;
        let y: Vec<f64> = (0..p).map(|i| 1.0 + i as f64).collect();
        let oracle = &series * nalgebra::DVector::from_column_slice(&y);
        let got = apply_t(&state, &y, TForm::CompactWy, true).unwrap();
        for i in 0..p {
            assert!((got[i] - oracle[i]).abs() <= 100.0 * EPS, "p={p} i={i}");
        }
    }
}

#[test]
fn apply_t_cgs2_dense_oracle() {
    let mut state = FactorState::new(3);
    state.set_l_row(1, &[0.1]);
    state.set_l_row(2, &[0.1, 0.1]);
    let y = [1.0, 2.0, -3.0];
    let t = DMatrix::from_row_slice(3, 3, &[1.0, -0.1, -0.1, -0.1, 1.0, -0.1, -0.1, -0.1, 1.0]);
    let oracle = t * nalgebra::DVector::from_column_slice(&y);
    let got = apply_t(&state, &y, TForm::Cgs2, false).unwrap();
    for i in 0..3 {
        assert!((got[i] - oracle[i]).abs() <= 4.0 * EPS);
    }
}

#[test]
fn wy_projection_matches_dense_projector() {
    for j in 1..=6 {
        let cols = conditioned_columns(15, j + 1, 1e3, 100 + j as u64);
        let mut v = KrylovBasis::new(15, j + 1);
        let mut state = FactorState::new(j + 1);
        let mut ledger = ReductionLedger::new();
        v.push(&cols[0]).unwrap();
        for c in &cols[1..=j] {
            v.push(c).unwrap();
            mgs_lvl2(&mut v, &mut state, NewColumn::Independent, &mut ledger).unwrap();
        }
        assert_eq!(ledger.len(), j);
        let projected = v.column(j).to_vec();

        // Dense projector I - Q T^T Q^T from the first j columns and T.
        let qd = dense(&v.to_columns()[..j]);
        let t = DMatrix::from_fn(j, j, |a, b| if a <= b { state.t(a, b) } else { 0.0 });
        let w = nalgebra::DVector::from_column_slice(&cols[j]);
        let dense_proj = &w - &qd * t.transpose() * qd.transpose() * &w;

        // Sequential rank-one projections as a second reference.
        let mut seq = cols[j].clone();
        for c in v.leading(j).iter() {
            let s = crate::kernels::local_dot(c, &seq);
            seq.iter_mut().zip(c).for_each(|(x, ci)| *x -= s * ci);
        }

        let scale = local_norm(&cols[j]);
        for i in 0..15 {
            assert!((projected[i] - dense_proj[i]).abs() <= 100.0 * EPS * scale, "j={j}");
            assert!((projected[i] - seq[i]).abs() <= 1e-12 * scale, "j={j}");
        }
    }
}

/// Reference QR with a positive diagonal.
fn reference_r(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let r = dense(cols).qr().r();
    let mut r = r;
    for i in 0..r.nrows() {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
        }
    }
    r
}

#[test]
fn kernels_match_reference_qr() {
    let cols = conditioned_columns(25, 8, 10.0, 77);
    let oracle = reference_r(&cols);
    for kernel in GsKernel::ALL {
        let mut ledger = ReductionLedger::new();
        let f = factor(kernel, 25, &cols, &mut ledger).unwrap();
        for j in 0..8 {
            let col_norm: f64 = (0..=j).map(|i| oracle[(i, j)].powi(2)).sum::<f64>().sqrt();
            for i in 0..=j {
                let diff = (f.state.r(i, j) - oracle[(i, j)]).abs();
                assert!(diff <= 1e-12 * col_norm, "{} R[{i}][{j}] off by {diff:e}", kernel.name());
            }
        }
    }
}

#[test]
fn cgs2_path_tracks_gram_matrix() {
    let cols = conditioned_columns(40, 8, 1e4, 5);
    let kappa = condition_number(&dense(&cols));
    let mut ledger = ReductionLedger::new();
    let f = factor(GsKernel::Cgs2TwoSync, 40, &cols, &mut ledger).unwrap();
    let g = crate::diagnostics::gram(f.q.all());
    // Row p-1 of L is only filled when a further column arrives.
    for i in 1..7 {
        for j in 0..i {
            assert!((f.state.l(i, j) - g[(i, j)]).abs() <= 100.0 * EPS * kappa);
        }
    }
}

#[test]
fn dependent_column_breaks_down() {
    let a = vec![1.0, 2.0, 3.0, 4.0];
    let b: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
    let cols = vec![a, b];
    for kernel in GsKernel::ALL {
        let mut ledger = ReductionLedger::new();
        match factor(kernel, 4, &cols, &mut ledger) {
            Err(Error::Breakdown { column, .. }) => assert_eq!(column, 1, "{}", kernel.name()),
            other => panic!("{}: expected breakdown, got {other:?}", kernel.name()),
        }
    }
}

#[test]
fn loss_orders_by_kernel_family() {
    let cols = conditioned_columns(60, 20, 1e6, 9);
    let cgs1 = factor_loss(GsKernel::Classical { passes: 1 }, &cols);
    let mgs = factor_loss(GsKernel::ModifiedLevel1, &cols);
    let cgs2 = factor_loss(GsKernel::Classical { passes: 2 }, &cols);
    assert!(cgs1 > 10.0 * mgs, "{cgs1:e} {mgs:e}");
    assert!(mgs > 10.0 * cgs2, "{mgs:e} {cgs2:e}");
    assert!(cgs2 <= 100.0 * EPS);
}
