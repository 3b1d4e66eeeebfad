use std::sync::Arc;

use super::*;
use crate::operator::{fix_blk, fix_lap, fix_ln, Explicit};
use crate::triplet::{kappa_minus, KAPPA_TOL};
use crate::weyl::WeylLimits;
use proptest::prelude::*;
use rand::Rng;

const LN2_ALPHA: f64 = -0.6229249257593206;

fn float_copy(op: &BlockJacobi, n: usize) -> BlockJacobi {
    let (a, b2) = op.exact_coefficients(n).unwrap().unwrap();
    let a: Vec<f64> = a.iter().map(|x| x.to_f64().unwrap()).collect();
    let b: Vec<f64> = b2.iter().map(|x| x.sqrt_to_f64()).collect();
    BlockJacobi::new(Arc::new(Explicit::from_scalars(&a, &b).unwrap()), "float copy")
}

fn lambda_min(s: &SectionModel) -> f64 {
    s.exact.as_ref().unwrap().eigenvalue(0, 1e-15, 1e-13)
}

#[test]
fn laplacian_truncation() {
    let s = friedrichs_section(&fix_lap(), 2).unwrap();
    assert_eq!(s.matrix, CMat::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]));
    assert!(s.corner.is_none() && row_residual(&s).is_none());
    let ev = section_spectrum(&s).unwrap();
    assert_eq!(ev, vec![1.0, 3.0]);
    let one = friedrichs_section(&fix_lap(), 1).unwrap();
    assert_eq!(section_spectrum(&one).unwrap().len(), 1);
    assert_eq!(friedrichs_section(&fix_lap(), 0), Err(SectionError::Empty));
}

#[test]
fn truncation_lambda_min_decreases() {
    let ln = fix_ln(2);
    let mins: Vec<f64> = (2..=20).map(|n| lambda_min(&friedrichs_section(&ln, n).unwrap())).collect();
    assert!(mins.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(kappa_empirical(&ln, 100, &ExtensionSpec::Friedrichs).unwrap(), 0);
}

#[test]
fn krein_kernel() {
    let ln = fix_ln(2);
    for n in [30, 60] {
        let s = krein_section(&ln, n).unwrap();
        assert!(s.flags.is_empty());
        let r = row_residual(&s).unwrap();
        assert!(r.exact);
        assert!(r.norm <= 1e-9 * r.u_norm, "N = {n}: {r:?}");
        assert!(lambda_min(&s).abs() <= 1e-9);
        assert!(s.exact.as_ref().unwrap().is_eigenvalue(&BigRational::zero()));
        assert_eq!(s.matrix.hermitian_defect(), 0.0);
        let plain = friedrichs_section(&ln, n).unwrap();
        let diff = &s.matrix - &plain.matrix;
        assert_eq!(diff.block(0, 0, n - 1, n).max_abs(), 0.0);
        assert_eq!(diff.block(0, 0, n, n - 1).max_abs(), 0.0);
    }
}

#[test]
fn krein_on_determinate_operator_is_flagged() {
    let s = krein_section(&fix_lap(), 5).unwrap();
    assert!(!s.flags.is_empty());
    assert_eq!(row_residual(&s).unwrap().norm, 0.0);
}

#[test]
fn float_path_matches_exact_path() {
    let ln = fix_ln(2);
    let fl = float_copy(&ln, 40);
    assert!(!fl.has_exact());
    for n in [5, 12, 20] {
        let e = krein_section(&ln, n).unwrap();
        let f = krein_section(&fl, n).unwrap();
        let (ce, cf) = (e.matrix[(n - 1, n - 1)].re, f.matrix[(n - 1, n - 1)].re);
        assert!((ce - cf).abs() <= 1e-9 * ce.abs().max(1.0), "N = {n}: {ce} vs {cf}");
        let r = row_residual(&f).unwrap();
        assert!(!r.exact && r.relative <= 1e-10, "{r:?}");
        let h = h_section(&fl, n, LN2_ALPHA - 1.0).unwrap();
        let he = h_section(&ln, n, LN2_ALPHA - 1.0).unwrap();
        assert!((h.matrix[(n - 1, n - 1)].re - he.matrix[(n - 1, n - 1)].re).abs() <= 1e-9 * ce.abs().max(1.0));
        assert!(row_residual(&h).unwrap().relative <= 1e-10);
    }
}

#[test]
fn block_krein_section() {
    let blk = fix_blk();
    for n in [3, 6, 9] {
        let s = krein_section(&blk, n).unwrap();
        assert!(s.exact.is_none());
        assert!(s.matrix.hermitian_defect() <= 1e-12 * s.matrix.max_abs());
        let r = row_residual(&s).unwrap();
        assert!(r.relative <= 1e-10, "N = {n}: {r:?}");
        let ev = section_spectrum(&s).unwrap();
        assert!(ev[0].abs() <= 1e-9 * s.matrix.max_abs(), "N = {n}: {}", ev[0]);
    }
    let krein_pair = ExtensionSpec::Pair { c: CMat::identity(2), d: CMat::zeros(2, 2) };
    assert_eq!(section(&blk, 4, &krein_pair).unwrap().matrix, krein_section(&blk, 4).unwrap().matrix);
    assert_eq!(h_section(&blk, 4, -1.0), Err(SectionError::NotScalar));
    let other = ExtensionSpec::Pair { c: CMat::identity(2), d: CMat::identity(2) };
    assert_eq!(section(&blk, 4, &other), Err(SectionError::NotScalar));
}

#[test]
fn h_family_corner() {
    let ln = fix_ln(2);
    let n = 25;
    let k = krein_section(&ln, n).unwrap();
    let inf = h_section(&ln, n, f64::NEG_INFINITY).unwrap();
    assert_eq!((&inf.matrix, &inf.exact), (&k.matrix, &k.exact));

    let h = -2.5;
    let s = h_section(&ln, n, h).unwrap();
    let c = s.corner.as_ref().unwrap();
    assert_eq!(c.rhs, -1.0 / h);
    assert_eq!(row_residual(&s).unwrap().norm, 0.0);

    // h = α: u = P + tQ with t = -1/α, proportional to Q - αP
    let f = h_section(&ln, n, LN2_ALPHA).unwrap();
    let t = eval_polys(&ln, C64::new(0.0, 0.0), 10, true).unwrap();
    let u = &f.corner.as_ref().unwrap().u;
    for j in 0..=10 {
        let want = -(t.q[j][(0, 0)].re - LN2_ALPHA * t.p[j][(0, 0)].re) / LN2_ALPHA;
        assert!((u[j][(0, 0)].re - want).abs() <= 1e-9 * want.abs().max(1e-30), "j = {j}");
    }
    assert!(matches!(h_section(&ln, n, f64::NAN), Err(SectionError::BadParameter(_))));
}

#[test]
fn zero_corner_denominator() {
    // g_{N-1} = hπ_{N-1} - σ_{N-1} vanishes at h = σ_{N-1}/π_{N-1}
    let ln = fix_ln(2);
    let t = exact_table(&ln, &BigRational::zero(), 3).unwrap();
    let h = t.ratio(2).unwrap();
    assert_eq!(h.to_f64().and_then(BigRational::from_f64), Some(h.clone()));
    assert_eq!(h_section(&ln, 3, h.to_f64().unwrap()), Err(SectionError::ZeroCornerDenominator { n: 2 }));
}

#[test]
fn kappa_counts() {
    let ln = fix_ln(2);
    let n = 60;
    assert_eq!(kappa_empirical(&ln, n, &ExtensionSpec::ScalarH(LN2_ALPHA - 0.5)).unwrap(), 0);
    assert_eq!(kappa_empirical(&ln, n, &ExtensionSpec::ScalarH(LN2_ALPHA + 0.5)).unwrap(), 1);
    assert_eq!(kappa_empirical(&ln, n, &ExtensionSpec::ScalarH(f64::NEG_INFINITY)).unwrap(), 0);
    let q_dir = ExtensionSpec::Pair { c: CMat::scalar(0.0), d: CMat::scalar(1.0) };
    assert_eq!(kappa_empirical(&ln, n, &q_dir).unwrap(), 1);
    assert_eq!(kappa_empirical(&fix_blk(), 4, &ExtensionSpec::Krein), Err(SectionError::NotScalar));
}

#[test]
fn kappa_scan_onset() {
    let ln = fix_ln(2);
    let limits = WeylLimits::from_alpha(alpha_estimate(&ln, 60, WINDOW, ALPHA_ACCURACY).unwrap());
    for h in [LN2_ALPHA - 0.5, LN2_ALPHA / 2.0, LN2_ALPHA + 0.5] {
        let spec = ExtensionSpec::ScalarH(h);
        let predicted = kappa_minus(&spec, &limits, KAPPA_TOL).unwrap().value;
        let scan = kappa_scan(&ln, &spec, predicted, 40).unwrap();
        assert_eq!(scan.counts.len(), 40);
        let onset = scan.onset.expect("counts settle");
        assert!(onset <= 40);
        assert!(scan.counts[onset - 1..].iter().all(|&c| c == Some(predicted)));
    }
    let f = kappa_scan(&ln, &ExtensionSpec::Friedrichs, 0, 30).unwrap();
    assert_eq!(f.onset, Some(1));
}

#[test]
fn ordering_examples() {
    let ln = fix_ln(2);
    let r = ordering_check(&ln, 60, &[f64::NEG_INFINITY, LN2_ALPHA], 1.0, 10, 1).unwrap();
    assert!(r.passed, "{r:?}");
    assert!((r.alpha - LN2_ALPHA).abs() < 1e-15);
    assert!(r.forms.iter().flatten().all(|&q| q > 0.0 && q <= 1.0 + 1e-12));
    assert!(ordering_check(&ln, 60, &[LN2_ALPHA - 2.0], 1.0, 10, 1).unwrap().passed);
    let swapped = ordering_check(&ln, 60, &[LN2_ALPHA, f64::NEG_INFINITY], 1.0, 10, 1).unwrap();
    assert!(!swapped.passed);
    assert!(swapped.worst_increase > ORDER_TOL);
    assert!(matches!(ordering_check(&ln, 20, &[0.0], 1.0, 3, 1), Err(SectionError::AboveAlpha { .. })));
    assert!(matches!(ordering_check(&ln, 20, &[-1.0], 0.0, 3, 1), Err(SectionError::BadParameter(_))));
}

#[test]
fn ordering_forms_match_dense_solve() {
    // small N keeps the dense inverse accurate
    let ln = fix_ln(2);
    let n = 6;
    let r = ordering_check(&ln, n, &[-3.0], 2.0, 4, 9).unwrap();
    let s = h_section(&ln, n, -3.0).unwrap();
    let shifted = &s.matrix + &CMat::identity(n).scale_real(2.0);
    let inv = invert(&shifted, 1e-15).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..4 {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let vc: Vec<C64> = v.iter().map(|x| C64::new(x / nv, 0.0)).collect();
        let w = inv.mul_vec(&vc);
        let form: f64 = w.iter().zip(&vc).map(|(a, b)| (a * b).re).sum();
        assert!((form - r.forms[0][k]).abs() <= 1e-9, "{form} vs {}", r.forms[0][k]);
    }
}

#[test]
fn spectral_stability() {
    let ln = fix_ln(2);
    for h in [LN2_ALPHA - 1.0, f64::NEG_INFINITY] {
        let a = section_eigenvalues_below(&h_section(&ln, 40, h).unwrap(), 1e3).unwrap();
        let b = section_eigenvalues_below(&h_section(&ln, 80, h).unwrap(), 1e3).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-6, "h = {h}: {x} vs {y}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn corner_rows_are_exact(n in 2usize..40, h in -20.0f64..LN2_ALPHA) {
        let s = h_section(&fix_ln(2), n, h).unwrap();
        let r = row_residual(&s).unwrap();
        prop_assert!(r.exact && r.norm == 0.0 && r.relative == 0.0);
        prop_assert_eq!(s.matrix.hermitian_defect(), 0.0);
    }

    #[test]
    fn ordering_for_random_pairs(n in 5usize..50, h1 in -30.0f64..LN2_ALPHA, dh in 0.0f64..10.0, seed in any::<u64>()) {
        let h0 = h1 - dh;
        let r = ordering_check(&fix_ln(2), n, &[h0, h1], 1.0, 5, seed).unwrap();
        prop_assert!(r.passed, "{:?}", r);
    }
}
