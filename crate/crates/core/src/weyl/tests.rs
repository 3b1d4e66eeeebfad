use super::*;
use crate::operator::fixtures::{BLK_ANGLE, BLK_SCALE};
use crate::operator::{fix_blk, fix_lap, fix_ln, MixedSum};
use crate::polys::Verdict;

// M(-10^k), k = 0..6, on FIX-LN(2), from a 120-digit series run at depth 62
const LN2_M: [f64; 7] = [
    0.3726553504559353,
    -0.3792089302673594,
    -0.5514970821031963,
    -0.6009239446591825,
    -0.6160368272320071,
    -0.6207510625206176,
    -0.6222359191743665,
];
const LN2_ALPHA: f64 = -0.6229249257593206;
const N_MAX: usize = 200;

fn x(v: f64) -> C64 {
    C64::new(v, 0.0)
}

#[test]
fn log_normal_values() {
    let ln = fix_ln(2);
    for (k, want) in LN2_M.iter().enumerate() {
        let s = weyl_eval(&ln, x(-(10f64.powi(k as i32))), DEFAULT_TOL, N_MAX).unwrap();
        assert_eq!((s.m.rows(), s.m.cols()), (1, 1));
        assert_eq!(s.m[(0, 0)].im, 0.0);
        assert!((s.m[(0, 0)].re - want).abs() <= 1e-12 * want.abs().max(1.0), "k = {k}: {}", s.m[(0, 0)].re);
        assert!(s.truncation_gap <= 1e-10);
        assert!(s.n_used <= N_MAX);
    }
}

#[test]
fn monotone_in_x() {
    let ln = fix_ln(2);
    let a = weyl_eval(&ln, x(-2.0), DEFAULT_TOL, N_MAX).unwrap();
    let b = weyl_eval(&ln, x(-1.0), DEFAULT_TOL, N_MAX).unwrap();
    assert!(a.m[(0, 0)].re <= b.m[(0, 0)].re);
    assert!(matrix_monotone(&[b, a], 1e-9).unwrap());
}

#[test]
fn determinate_operator_is_rejected() {
    assert!(matches!(
        weyl_eval(&fix_lap(), x(-1.0), DEFAULT_TOL, N_MAX),
        Err(WeylError::Poly(PolyError::NotCompletelyIndeterminate(Verdict::Determinate)))
    ));
    assert!(matches!(weyl_eval(&fix_ln(2), x(1.0), DEFAULT_TOL, N_MAX), Err(WeylError::BadPoint(_))));
}

#[test]
fn block_fixture_matches_scalar_oracle() {
    // FIX-BLK = U (J ⊕ cJ) U*, so M_blk(x) = U diag(M(x), M(x/c)/c) U*
    let ln = fix_ln(2);
    let blk = fix_blk();
    let u = MixedSum::rotation(BLK_ANGLE);
    let c = BLK_SCALE as f64;
    for v in [-0.1, -1.0, -30.0] {
        let m1 = weyl_eval(&ln, x(v), DEFAULT_TOL, N_MAX).unwrap().m[(0, 0)].re;
        let m2 = weyl_eval(&ln, x(v / c), DEFAULT_TOL, N_MAX).unwrap().m[(0, 0)].re / c;
        let want = &(&u * &CMat::diag_real(&[m1, m2])) * &u.adjoint();
        let got = weyl_eval(&blk, x(v), DEFAULT_TOL, N_MAX).unwrap();
        assert!((&got.m - &want).max_abs() <= 1e-9 * want.max_abs(), "x = {v}");
        assert!(got.hermitian_defect <= 1e-9 * got.m.frob_norm());
    }
}

#[test]
fn limit_scalar() {
    let grid: Vec<f64> = (1..=6).map(|k| -(10f64.powi(k))).collect();
    let lim = weyl_limit_minus_inf(&fix_ln(2), &grid, 1e-6, N_MAX).unwrap();
    assert_eq!(lim.mode, LimitMode::ScalarProven);
    assert!((lim.scalar().unwrap() - LN2_ALPHA).abs() < 1e-12);
    assert!(lim.distances.windows(2).all(|w| w[1] <= w[0]));
    assert!(lim.flags.is_empty());
    assert!(matches!(weyl_limit_minus_inf(&fix_ln(2), &[-1.0, -0.5], 1e-6, N_MAX), Err(WeylError::LimitNotSettled(_))));
}

#[test]
fn limit_block() {
    let grid: Vec<f64> = (2..=9).map(|k| -(10f64.powi(k))).collect();
    let lim = weyl_limit_minus_inf(&fix_blk(), &grid, 1e-2, N_MAX).unwrap();
    assert_eq!(lim.mode, LimitMode::BlockHeuristic);
    let u = MixedSum::rotation(BLK_ANGLE);
    let c = BLK_SCALE as f64;
    let want = &(&u * &CMat::diag_real(&[LN2_ALPHA, LN2_ALPHA / c])) * &u.adjoint();
    let err = (&lim.m_minus_inf - &want).max_abs();
    let raw = (&lim.samples.last().unwrap().m - &want).max_abs();
    assert!(err < raw, "extrapolation {err:e} should beat the last sample {raw:e}");
}

#[test]
fn resolvent_decays_toward_zero() {
    let grid: Vec<f64> = (1..=5).map(|k| -(10f64.powi(-k))).collect();
    let norms = weyl_zero_resolvent(&fix_ln(2), &[1.0, 10.0], &grid, N_MAX).unwrap();
    assert_eq!(norms.len(), 10);
    let (g1, g10) = norms.split_at(5);
    assert!(g1.windows(2).all(|w| w[1].norm < w[0].norm));
    assert!(g10.windows(2).all(|w| w[1].norm < w[0].norm));
    for (a, b) in g1.iter().zip(g10) {
        assert!(b.norm < a.norm);
    }
    assert!(g1[4].norm <= 0.1 * g1[0].norm);
    assert!(weyl_zero_resolvent(&fix_ln(2), &[1.0], &[], N_MAX).unwrap().is_empty());
}

#[test]
fn herglotz() {
    let ln = fix_ln(2);
    assert!(herglotz_check(&ln, &[C64::new(-1.0, 1.0), C64::new(-1.0, 10.0)], N_MAX).unwrap());
    assert!(herglotz_check(&fix_blk(), &[C64::new(-1.0, 1.0), C64::new(2.0, 0.5)], N_MAX).unwrap());
    let lower = weyl_eval(&ln, C64::new(-1.0, -1.0), DEFAULT_TOL, N_MAX).unwrap();
    assert!(imaginary_part(&lower.m)[(0, 0)].re < 0.0);
    assert!(matches!(herglotz_check(&ln, &[C64::new(-1.0, -1.0)], N_MAX), Err(WeylError::BadPoint(_))));
}

#[test]
fn large_negative_points_use_rescaling() {
    let ln = fix_ln(2);
    let s = weyl_eval(&ln, x(-1e12), DEFAULT_TOL, N_MAX).unwrap();
    let m = s.m[(0, 0)].re;
    assert!(m.is_finite() && m < LN2_M[6] && m > LN2_ALPHA);
}
