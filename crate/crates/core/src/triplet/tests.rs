use super::*;
use crate::operator::{fix_blk, fix_geo, fix_lap, fix_ln};
use crate::polys::{alpha_estimate, ALPHA_ACCURACY, WINDOW};
use crate::weyl::WeylLimits;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c1(x: f64) -> Vec<C64> {
    vec![C64::new(x, 0.0)]
}

fn ln_limits() -> WeylLimits {
    WeylLimits::from_alpha(alpha_estimate(&fix_ln(2), 60, WINDOW, ALPHA_ACCURACY).unwrap())
}

#[test]
fn laplacian_telescoping() {
    // e₀: Σ P_j(0)(Jf)_j = 1·2 + (-2)·1 and Σ Q_j(0)(Jf)_j - f₀ = 0·2 + 1·1 - 1
    let s = boundary_sums(&fix_lap(), &CoeffVector::from_reals(&[1.0])).unwrap();
    assert_eq!(s.gamma0_part, c1(0.0));
    assert_eq!(s.gamma1_part, c1(0.0));
}

#[test]
fn boundary_maps_on_tail_directions() {
    let ln = fix_ln(2);
    let t = Triplet::new(&ln, 200).unwrap();
    let zero = CoeffVector::zeros(1, 1);
    let u_c = DomainVector::new(zero.clone(), c1(0.7), c1(0.0));
    assert_eq!(t.gamma0(&u_c, STRUCT_TOL).unwrap(), c1(0.0));
    assert_eq!(t.gamma1(&u_c, STRUCT_TOL).unwrap(), c1(-0.7));
    let u_d = DomainVector::new(zero.clone(), c1(0.0), c1(-1.5));
    assert_eq!(t.gamma0(&u_d, STRUCT_TOL).unwrap(), c1(-1.5));
    assert_eq!(t.gamma1(&u_d, STRUCT_TOL).unwrap(), c1(0.0));
    let f = DomainVector::finite(CoeffVector::from_reals(&[1.0]));
    assert!(norm(&t.gamma0(&f, STRUCT_TOL).unwrap()) <= 1e-12);
    assert!(norm(&t.gamma1(&f, STRUCT_TOL).unwrap()) <= 1e-12);
}

#[test]
fn green_identity_examples() {
    let ln = fix_ln(2);
    let t = Triplet::new(&ln, 200).unwrap();
    let zero = CoeffVector::zeros(1, 1);
    let u = DomainVector::new(zero.clone(), c1(0.3), c1(0.0));
    let v = DomainVector::new(zero, c1(0.0), c1(2.0));
    assert!(t.green_residual(&u, &v).unwrap() <= 1e-14);
    assert!(t.green_residual(&u, &u).unwrap() <= 1e-14);
    let f = DomainVector::finite(CoeffVector::from_reals(&[1.0, -2.0, 0.5]));
    let g = DomainVector::finite(CoeffVector::from_reals(&[0.0, 1.0, 1.0, 3.0]));
    assert!(t.green_residual(&f, &g).unwrap() <= 1e-9);
    assert!(matches!(Triplet::new(&fix_lap(), 200), Err(TripletError::Poly(PolyError::NotCompletelyIndeterminate(_)))));
}

#[test]
fn kernel_identity_on_all_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for op in [fix_lap(), fix_ln(2), fix_geo(4.0).unwrap(), fix_blk()] {
        for _ in 0..10 {
            let support = rng.gen_range(0..=30);
            let f = random_finite_vector(&op, support, &mut rng).unwrap();
            let s = boundary_sums(&op, &f).unwrap();
            assert!(norm(&s.gamma0_part) <= 1e-10, "{} Γ₀ {:e}", op.label(), norm(&s.gamma0_part));
            assert!(norm(&s.gamma1_part) <= 1e-10, "{} Γ₁ {:e}", op.label(), norm(&s.gamma1_part));
        }
    }
}

#[test]
fn exact_kernel_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for op in [fix_lap(), fix_ln(2), fix_geo(4.0).unwrap()] {
        for _ in 0..5 {
            let n = rng.gen_range(1..=31);
            let g: Vec<BigRational> = (0..n).map(|_| BigRational::ratio(rng.gen_range(-99..=99), rng.gen_range(1..=50)).unwrap()).collect();
            let (s0, s1) = boundary_sums_exact(&op, &g).unwrap();
            assert!(s0.is_zero() && s1.is_zero(), "{}", op.label());
        }
    }
    assert_eq!(boundary_sums_exact(&fix_blk(), &[BigRational::one()]), Err(TripletError::NotScalar));
}

#[test]
fn rofe_beketov_examples() {
    let i = CMat::identity(2);
    let o = CMat::zeros(2, 2);
    assert!(selfadjoint_check(&i, &o, STRUCT_TOL).unwrap());
    assert!(selfadjoint_check(&i, &i, STRUCT_TOL).unwrap());
    assert!(!selfadjoint_check(&o, &o, STRUCT_TOL).unwrap());
    let nonsym = CMat::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
    assert!(!selfadjoint_check(&nonsym, &i, STRUCT_TOL).unwrap());
    assert!(selfadjoint_check(&i, &CMat::identity(3), STRUCT_TOL).is_err());
}

#[test]
fn nonneg_and_kappa_scalar() {
    let lim = ln_limits();
    let alpha = lim.scalar().unwrap();
    assert!(nonneg_check(&ExtensionSpec::ScalarH(alpha - 1.0), &lim, KAPPA_TOL).unwrap().value);
    let above = ExtensionSpec::Pair { c: CMat::scalar(alpha + 1.0), d: CMat::scalar(1.0) };
    assert!(!nonneg_check(&above, &lim, KAPPA_TOL).unwrap().value);
    assert_eq!(kappa_minus(&above, &lim, KAPPA_TOL).unwrap().value, 1);
    assert!(nonneg_check(&ExtensionSpec::Pair { c: CMat::scalar(1.0), d: CMat::scalar(0.0) }, &lim, KAPPA_TOL).unwrap().value);
    for h in [alpha - 3.0, alpha, f64::NEG_INFINITY] {
        assert_eq!(kappa_minus(&ExtensionSpec::ScalarH(h), &lim, KAPPA_TOL).unwrap().value, 0);
    }
    let q_dir = ExtensionSpec::Pair { c: CMat::scalar(0.0), d: CMat::scalar(1.0) };
    assert_eq!(kappa_minus(&q_dir, &lim, KAPPA_TOL).unwrap().value, 1);
}

#[test]
fn classification() {
    let lim = ln_limits();
    let alpha = lim.scalar().unwrap();
    let cl = |s: ExtensionSpec| classify(&s, &lim, KAPPA_TOL).unwrap().value;
    assert_eq!(cl(ExtensionSpec::ScalarH(alpha)), Classification::IsFriedrichs);
    assert_eq!(cl(ExtensionSpec::Pair { c: CMat::scalar(1.0), d: CMat::scalar(0.0) }), Classification::IsKrein);
    assert_eq!(cl(ExtensionSpec::ScalarH(alpha / 2.0)), Classification::Indefinite(1));
    assert_eq!(cl(ExtensionSpec::ScalarH(alpha - 1.0)), Classification::NonNeg);
    assert_eq!(cl(ExtensionSpec::ScalarH(f64::NEG_INFINITY)), Classification::IsKrein);
    assert_eq!(cl(ExtensionSpec::Friedrichs), Classification::IsFriedrichs);
    // h crosses α once: NonNeg below, Indefinite above
    let scan: Vec<Classification> = (0..20).map(|k| cl(ExtensionSpec::ScalarH(alpha - 1.0 + 0.1 * k as f64 + 0.05))).collect();
    let switches = scan.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(switches, 1);
    assert_eq!(scan[0], Classification::NonNeg);
    assert_eq!(scan[19], Classification::Indefinite(1));
}

#[test]
fn block_pair_carries_heuristic_warning() {
    let blk = fix_blk();
    let grid: Vec<f64> = (2..=9).map(|k| -(10f64.powi(k))).collect();
    let lim = crate::weyl::weyl_limit_minus_inf(&blk, &grid, 1e-5, 200).unwrap();
    let krein = ExtensionSpec::Pair { c: CMat::identity(2), d: CMat::zeros(2, 2) };
    let r = classify(&krein, &lim, KAPPA_TOL).unwrap();
    assert_eq!(r.value, Classification::IsKrein);
    assert!(!r.warnings.is_empty());
    // D = I, C = 0: CD* - DM(-∞)D* = -M(-∞) has two positive eigenvalues
    let zero_c = ExtensionSpec::Pair { c: CMat::zeros(2, 2), d: CMat::identity(2) };
    assert_eq!(kappa_minus(&zero_c, &lim, KAPPA_TOL).unwrap().value, 2);
    assert!(matches!(kappa_minus(&ExtensionSpec::ScalarH(-1.0), &lim, KAPPA_TOL), Err(TripletError::NotScalar)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_identity_random(seed in any::<u64>()) {
        let ln = fix_ln(2);
        let t = Triplet::new(&ln, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || {
            let s = rng.gen_range(0..=10);
            let f = random_finite_vector(&ln, s, &mut rng).unwrap();
            DomainVector::new(f, random_tail(1, &mut rng), random_tail(1, &mut rng))
        };
        let (u, v) = (draw(), draw());
        prop_assert!(t.green_residual(&u, &v).unwrap() <= 1e-8);
    }

    #[test]
    fn green_identity_random_block(seed in any::<u64>()) {
        let blk = fix_blk();
        let t = Triplet::new(&blk, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || {
            let s = rng.gen_range(0..=10);
            let f = random_finite_vector(&blk, s, &mut rng).unwrap();
            DomainVector::new(f, random_tail(2, &mut rng), random_tail(2, &mut rng))
        };
        let (u, v) = (draw(), draw());
        prop_assert!(t.green_residual(&u, &v).unwrap() <= 1e-8);
    }
}
