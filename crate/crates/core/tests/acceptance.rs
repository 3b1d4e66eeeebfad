//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line with the measured quantity and its pinned bound.

use std::time::{Duration, Instant};

use jext::cli::{parse_config, run, Command, EXIT_INCONCLUSIVE};
use jext::exactq::BigRational;
use jext::numkernel::{hermitian_eigen, inertia, CMat, C64};
use jext::operator::{
    fix_blk, fix_geo, fix_lap, fix_ln, gauss_rule_moments, jacobi_from_moments, recurrence_from_moments, MomentSequence,
};
use jext::polys::{alpha_estimate, deficiency_probe, exact_alpha, Verdict, ALPHA_ACCURACY, PROBE_TOL, WINDOW};
use jext::sections::{kappa_empirical, krein_section, ordering_check, row_residual, section_spectrum};
use jext::triplet::{
    boundary_sums, boundary_sums_exact, kappa_minus, random_finite_vector, random_tail, DomainVector, ExtensionSpec, Triplet, KAPPA_TOL,
};
use jext::weyl::{matrix_monotone, weyl_grid, weyl_zero_resolvent, WeylLimits};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `M(-10^k)`, `k = 0..6`, for FIX-LN(2) from an independent 200-digit evaluation.
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

fn verdict(id: &str, what: &str, pass: bool, detail: String) {
    println!("{} [{id}] {what}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn ln_alpha() -> f64 {
    alpha_estimate(&fix_ln(2), 60, WINDOW, ALPHA_ACCURACY).unwrap().value
}

#[test]
fn criterion_01_green_identity() {
    let t0 = Instant::now();
    let op = fix_ln(2);
    let t = Triplet::new(&op, 200).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let vs: Vec<DomainVector> = (0..100)
        .map(|_| {
            let s = rng.gen_range(0..=30);
            let f = random_finite_vector(&op, s, &mut rng).unwrap();
            DomainVector::new(f, random_tail(1, &mut rng), random_tail(1, &mut rng))
        })
        .collect();
    let mut worst: f64 = 0.0;
    for k in 0..vs.len() {
        worst = worst.max(t.green_residual(&vs[k], &vs[(k + 1) % vs.len()]).unwrap());
        worst = worst.max(t.green_residual(&vs[k], &vs[k]).unwrap());
    }
    let el = t0.elapsed();
    verdict(
        "1",
        "Green identity, 100 vectors on FIX-LN(2)",
        worst <= 1e-8 && el < Duration::from_secs(10),
        format!("max residual {worst:.3e} (bound 1e-8), {:.2} s (bound 10 s)", el.as_secs_f64()),
    );
}

#[test]
fn criterion_02_kernel_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ops = [fix_lap(), fix_ln(2), fix_geo(4.0).unwrap(), fix_blk()];
    let mut worst: f64 = 0.0;
    let mut exact_nonzero = 0usize;
    for op in &ops {
        for _ in 0..50 {
            let s = rng.gen_range(0..=30);
            let f = random_finite_vector(op, s, &mut rng).unwrap();
            let b = boundary_sums(op, &f).unwrap();
            worst = worst.max(norm(&b.gamma0_part)).max(norm(&b.gamma1_part));
            if op.has_exact() {
                let g: Vec<BigRational> =
                    (0..=s).map(|_| BigRational::ratio(rng.gen_range(-999..=999), rng.gen_range(1..=999)).unwrap()).collect();
                let (s0, s1) = boundary_sums_exact(op, &g).unwrap();
                exact_nonzero += usize::from(!s0.is_zero() || !s1.is_zero());
            }
        }
    }
    verdict(
        "2",
        "boundary-map kernel identity on LAP, LN(2), GEO(4), BLK",
        worst <= 1e-10 && exact_nonzero == 0,
        format!("max |Γ| {worst:.3e} (bound 1e-10), exact nonzero {exact_nonzero} (bound 0)"),
    );
}

#[test]
fn criterion_03_alpha_certificate() {
    let t0 = Instant::now();
    let op = fix_ln(2);
    let est = alpha_estimate(&op, 40, WINDOW, 1e-8);
    let el = t0.elapsed();
    let (pass, detail) = match est {
        Ok(a) => (
            a.value < 0.0 && a.cauchy_width <= 1e-8 && a.exact.is_some() && el < Duration::from_secs(30),
            format!("alpha {:.16} spread {:.3e} (bound 1e-8) at j = 40, {:.2} s (bound 30 s)", a.value, a.cauchy_width, el.as_secs_f64()),
        ),
        Err(e) => (false, e.to_string()),
    };
    verdict("3", "exact alpha certificate on FIX-LN(2)", pass, detail);
}

fn ln_grid_samples() -> Vec<jext::weyl::WeylSample> {
    let zs: Vec<C64> = (0..=6).map(|k| C64::new(-(10f64.powi(k)), 0.0)).collect();
    weyl_grid(&fix_ln(2), &zs, 1e-12, 200).unwrap()
}

#[test]
fn criterion_04a_weyl_monotone() {
    let s = ln_grid_samples();
    let mono = matrix_monotone(&s, 1e-9).unwrap();
    let dev = s.iter().zip(LN2_M).map(|(x, m)| (x.m[(0, 0)].re - m).abs()).fold(0.0, f64::max);
    verdict(
        "4a",
        "M(-10^k) monotone on FIX-LN(2)",
        mono && dev <= 1e-12,
        format!("monotone {mono}, max deviation from reference {dev:.3e} (bound 1e-12)"),
    );
}

#[test]
fn criterion_04b_weyl_cauchy_to_alpha() {
    let s = ln_grid_samples();
    let alpha = ln_alpha();
    let dist = (s[6].m[(0, 0)].re - alpha).abs();
    let spread = (s[6].m[(0, 0)].re - s[5].m[(0, 0)].re).abs();
    verdict(
        "4b",
        "M(-10^k) Cauchy toward alpha within 1e-6",
        dist <= 1e-6 && spread <= 1e-6,
        format!("|M(-1e6) - alpha| {dist:.3e}, |M(-1e6) - M(-1e5)| {spread:.3e} (bound 1e-6)"),
    );
}

#[test]
fn criterion_04c_zero_resolvent_decay() {
    let r = weyl_zero_resolvent(&fix_ln(2), &[1.0, 10.0], &[-1e-1, -1e-5], 200).unwrap();
    let ratios: Vec<f64> = [1.0, 10.0]
        .iter()
        .map(|&g| {
            let v: Vec<f64> = r.iter().filter(|x| x.gamma == g).map(|x| x.norm).collect();
            v[1] / v[0]
        })
        .collect();
    verdict(
        "4c",
        "resolvent of M + gamma decays toward 0",
        ratios.iter().all(|&q| q <= 0.1),
        format!("ratios {:.3e}, {:.3e} for gamma 1, 10 (bound 0.1)", ratios[0], ratios[1]),
    );
}

#[test]
fn criterion_05_krein_kernel() {
    let op = fix_ln(2);
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [30, 60] {
        let s = krein_section(&op, n).unwrap();
        let r = row_residual(&s).unwrap();
        let l = section_spectrum(&s).unwrap()[0];
        pass &= r.norm <= 1e-9 * r.u_norm && l.abs() <= 1e-9;
        parts.push(format!("N={n}: |J P|/|P| {:.3e}, lambda_min {l:.3e}", r.norm / r.u_norm));
    }
    verdict("5", "Krein section kernel on FIX-LN(2)", pass, format!("{} (bound 1e-9)", parts.join("; ")));
}

#[test]
fn criterion_06_krein_ordering() {
    let op = fix_ln(2);
    let alpha = ln_alpha();
    let ascending = [f64::NEG_INFINITY, -1e3, alpha - 10.0, alpha - 1.0, alpha];
    let swapped: Vec<f64> = ascending.iter().rev().copied().collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [40, 80] {
        let good = ordering_check(&op, n, &ascending, 1.0, 20, 6).unwrap();
        let bad = ordering_check(&op, n, &swapped, 1.0, 20, 6).unwrap();
        pass &= good.passed && !bad.passed;
        parts.push(format!("N={n}: ordered {} (worst {:.1e}), swapped {}", good.passed, good.worst_increase, bad.passed));
    }
    verdict("6", "Krein ordering with swapped-order control", pass, parts.join("; "));
}

#[test]
fn criterion_07_kappa_agreement() {
    let t0 = Instant::now();
    let op = fix_ln(2);
    let limits = WeylLimits::from_alpha(alpha_estimate(&op, 60, WINDOW, ALPHA_ACCURACY).unwrap());
    let alpha = limits.scalar().unwrap();
    let specs = [
        (ExtensionSpec::ScalarH(alpha - 0.5), 0),
        (ExtensionSpec::ScalarH(alpha / 2.0), 1),
        (ExtensionSpec::ScalarH(alpha + alpha.abs() / 2.0), 1),
        (ExtensionSpec::Pair { c: CMat::scalar(0.0), d: CMat::scalar(1.0) }, 1),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, expected) in &specs {
        let predicted = kappa_minus(spec, &limits, KAPPA_TOL).unwrap().value;
        let seen = kappa_empirical(&op, 120, spec).unwrap();
        pass &= predicted == seen && seen == *expected;
        parts.push(format!("{}: {seen}/{predicted}", spec.describe()));
    }
    let el = t0.elapsed();
    pass &= el < Duration::from_secs(60);
    verdict(
        "7",
        "empirical vs predicted negative count at N = 120",
        pass,
        format!("{}, {:.2} s (bound 60 s)", parts.join(", "), el.as_secs_f64()),
    );
}

#[test]
fn criterion_08_determinate_rejection() {
    let probe = deficiency_probe(&fix_lap(), 200, PROBE_TOL).unwrap();
    let cfg = |ext: &str| parse_config(&format!(r#"{{"p":1,"source":{{"fixture":"FIX-LAP"}}{ext}}}"#)).unwrap();
    let cases = [
        ("alpha", cfg(""), Command::Alpha),
        ("weyl", cfg(""), Command::Weyl),
        ("classify", cfg(r#","extension":{"h":-1}"#), Command::Classify),
        ("classify krein", cfg(r#","extension":"krein""#), Command::Classify),
        ("spectrum friedrichs", cfg(r#","extension":"friedrichs""#), Command::Spectrum),
        ("spectrum h", cfg(r#","extension":{"h":0}"#), Command::Spectrum),
    ];
    let codes: Vec<(&str, i32)> = cases.iter().map(|(n, c, cmd)| (*n, run(c, *cmd).exit_code)).collect();
    let pass = probe.verdict == Verdict::Determinate && codes.iter().all(|&(_, c)| c == EXIT_INCONCLUSIVE);
    verdict(
        "8",
        "FIX-LAP is determinate and extension commands exit 2",
        pass,
        format!("probe {:?}, exits {codes:?}", probe.verdict),
    );
}

#[test]
fn criterion_09_moment_round_trip() {
    let m: Vec<BigRational> = (0..16).map(|n| BigRational::ratio(1, n + 1).unwrap()).collect();
    let op = jacobi_from_moments(&MomentSequence::new(m.clone()).unwrap()).unwrap();
    let (a0, b0sq) = op.exact(0).unwrap().unwrap();
    let mut pass = a0 == BigRational::ratio(1, 2).unwrap() && b0sq == BigRational::ratio(1, 12).unwrap();
    let mut bad = Vec::new();
    for n in 1..=8usize {
        let (a, b2) = recurrence_from_moments(&m[..2 * n]).unwrap();
        let g = gauss_rule_moments(&m[0], &a, &b2, n, 2 * n);
        if g[..] != m[..2 * n] {
            bad.push(n);
        }
    }
    pass &= bad.is_empty();
    verdict(
        "9",
        "moment round trip for m_n = 1/(n+1)",
        pass,
        format!("a0 = {a0}, b0^2 = {b0sq}, Gauss mismatches at N in {bad:?}"),
    );
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    m.hermitian_part()
}

fn rand_q(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::ratio(rng.gen_range(-1_000_000_000..=1_000_000_000), rng.gen_range(1..=1_000_000_000)).unwrap()
}

#[test]
fn criterion_10_kernel_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut eig_worst: f64 = 0.0;
    for n in 1..=16 {
        for _ in 0..4 {
            let h = random_hermitian(n, &mut rng);
            let e = hermitian_eigen(&h, 1e-14).unwrap();
            let r = &(&h * &e.vectors) - &(&e.vectors * &CMat::diag_real(&e.values));
            let o = &(&e.vectors.adjoint() * &e.vectors) - &CMat::identity(n);
            eig_worst = eig_worst.max(r.frob_norm() / h.frob_norm().max(1.0)).max(o.frob_norm());
        }
    }
    let mut inertia_bad = 0;
    for n in 2..=12 {
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let h = CMat::diag_real(&d);
        let mut s = CMat::identity(n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] += C64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            }
        }
        let shs = (&(&s * &h) * &s.adjoint()).hermitian_part();
        inertia_bad += usize::from(inertia(&h, 1e-9).unwrap() != inertia(&shs, 1e-9).unwrap());
    }
    let mut field_bad = 0;
    for _ in 0..300 {
        let (a, b, c) = (rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng));
        let ok = &a + &b == &b + &a
            && &a * &b == &b * &a
            && (&a + &b) + &c == &a + &(&b + &c)
            && (&a * &b) * &c == &a * &(&b * &c)
            && &a * &(&b + &c) == &(&a * &b) + &(&a * &c)
            && &a - &a == BigRational::zero()
            && (a.is_zero() || &a * &a.recip().unwrap() == BigRational::one());
        field_bad += usize::from(!ok);
    }
    verdict(
        "10",
        "kernel suite (eigensolver, inertia, rational field)",
        eig_worst <= 1e-12 && inertia_bad == 0 && field_bad == 0,
        format!("eigen residual {eig_worst:.3e} (bound 1e-12), inertia failures {inertia_bad}, field failures {field_bad}"),
    );
}

#[test]
fn reference_alpha_matches_exact_ratio() {
    let q = exact_alpha(&fix_ln(2), 80).unwrap().unwrap();
    assert!((q.to_f64().unwrap() - LN2_ALPHA).abs() <= 1e-15);
    assert!((ln_alpha() - LN2_ALPHA).abs() <= 1e-15);
}
