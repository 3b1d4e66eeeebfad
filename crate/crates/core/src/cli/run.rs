//! Command dispatch: one [`Report`] per command.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::exactq::{q_to_float, BigRational};
use crate::numkernel::{hermitian_eigen, inertia, CMat, C64};
use crate::operator::{gauss_rule_moments, nonneg_probe, recurrence_from_moments, BlockJacobi, MomentSequence, NonnegVerdict};
use crate::polys::{alpha_estimate, deficiency_probe, eval_polys, require_indeterminate, Verdict, WINDOW};
use crate::sections::{
    kappa_empirical, krein_section, ordering_check, row_residual, section, section_spectrum, friedrichs_section,
};
use crate::triplet::{
    boundary_sums, classify, kappa_minus, nonneg_check, random_finite_vector, random_tail, selfadjoint_check, Classification,
    DomainVector, ExtensionSpec, Triplet, STRUCT_TOL,
};
use crate::weyl::{herglotz_check, matrix_monotone, weyl_grid, weyl_limit_minus_inf, weyl_zero_resolvent, WeylLimits};

use super::config::{ExtensionConfig, RunConfig, Source};
use super::report::{Cell, CliError, Report, Table, EXIT_INCONCLUSIVE, EXIT_NUMERIC};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Probe,
    Alpha,
    Weyl,
    Classify,
    Spectrum,
    Validate,
    FromMoments,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Probe => "probe",
            Self::Alpha => "alpha",
            Self::Weyl => "weyl",
            Self::Classify => "classify",
            Self::Spectrum => "spectrum",
            Self::Validate => "validate",
            Self::FromMoments => "from-moments",
        }
    }
}

/// Block limit tolerance when `tolerances.limit` is unset.
const BLOCK_LIMIT_TOL: f64 = 1e-5;
const SCALAR_LIMIT_TOL: f64 = 1e-6;
/// Required decay of `‖(M(x)+γ)⁻¹‖` across `zero_grid`.
const ZERO_DECAY: f64 = 0.1;
/// Sizes used by `validate`.
const GREEN_PAIRS: usize = 100;
const KERNEL_VECTORS: usize = 50;
const KERNEL_SUPPORT: usize = 30;
const ORDER_TRIALS: usize = 20;
const SECTION_TOL: f64 = 1e-9;

/// Runs `command`; failures are recorded in the report, never returned.
pub fn run(cfg: &RunConfig, command: Command) -> Report {
    let mut report = Report::new(command.name(), cfg.echo());
    let result = cfg.operator().and_then(|op| match command {
        Command::Probe => probe(cfg, &op, &mut report),
        Command::Alpha => alpha(cfg, &op, &mut report),
        Command::Weyl => weyl(cfg, &op, &mut report),
        Command::Classify => classify_cmd(cfg, &op, &mut report),
        Command::Spectrum => spectrum(cfg, &op, &mut report),
        Command::Validate => validate(cfg, &op, &mut report),
        Command::FromMoments => from_moments(cfg, &mut report),
    });
    if let Err(e) = result {
        report.fail(&e);
    }
    report
}

fn json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::CompletelyIndeterminate => "CompletelyIndeterminate",
        Verdict::Determinate => "Determinate",
        Verdict::Inconclusive => "Inconclusive",
    }
}

fn decimal(q: &BigRational, bits: u32) -> String {
    match q_to_float(q, bits) {
        Ok(r) => r.to_decimal_string(),
        Err(e) => format!("{e}"),
    }
}

fn limit_tol(cfg: &RunConfig) -> f64 {
    cfg.tolerances.limit.unwrap_or(if cfg.p == 1 { SCALAR_LIMIT_TOL } else { BLOCK_LIMIT_TOL })
}

/// `M(-∞)`: `α` for scalar operators, the grid extrapolation for blocks.
fn limits(cfg: &RunConfig, op: &BlockJacobi) -> Result<WeylLimits, CliError> {
    if op.p() == 1 {
        let a = alpha_estimate(op, cfg.alpha_depth, WINDOW, cfg.tolerances.alpha)?;
        return Ok(WeylLimits::from_alpha(a));
    }
    Ok(weyl_limit_minus_inf(op, &cfg.limit_grid, limit_tol(cfg), cfg.n_max)?)
}

fn resolve(e: &ExtensionConfig, p: usize, alpha: Option<f64>) -> Result<ExtensionSpec, CliError> {
    let scalar = |field: &str| match p {
        1 => Ok(()),
        _ => Err(CliError::Validation { field: field.into(), msg: "scalar h needs p = 1".into() }),
    };
    Ok(match e {
        ExtensionConfig::Friedrichs => ExtensionSpec::Friedrichs,
        ExtensionConfig::Krein => ExtensionSpec::Krein,
        ExtensionConfig::H(h) => {
            scalar("h")?;
            ExtensionSpec::ScalarH(*h)
        }
        ExtensionConfig::AlphaOffset(o) => {
            scalar("alpha_offset")?;
            let a = alpha.ok_or_else(|| CliError::Validation { field: "alpha_offset".into(), msg: "alpha is unavailable".into() })?;
            ExtensionSpec::ScalarH(a + o)
        }
        ExtensionConfig::Pair { c, d } => ExtensionSpec::Pair { c: CMat::from_real_rows(c), d: CMat::from_real_rows(d) },
    })
}

fn needs_alpha(list: &[ExtensionConfig]) -> bool {
    list.iter().any(|e| matches!(e, ExtensionConfig::AlphaOffset(_)))
}

fn scalar_alpha(cfg: &RunConfig, op: &BlockJacobi) -> Result<f64, CliError> {
    Ok(alpha_estimate(op, cfg.alpha_depth, WINDOW, cfg.tolerances.alpha)?.value)
}

fn probe(cfg: &RunConfig, op: &BlockJacobi, report: &mut Report) -> Result<(), CliError> {
    let r = deficiency_probe(op, cfg.n_max, cfg.tolerances.probe)?;
    report.verdict("verdict", verdict_name(r.verdict));
    report.verdict("n_used", r.n_used);
    if r.verdict == Verdict::Inconclusive {
        report.warnings.push("deficiency probe is inconclusive within N_max".into());
        report.escalate(EXIT_INCONCLUSIVE);
    }
    let mut t = Table::new("evidence", &["point", "series", "end", "increment", "partial_sum"]);
    for w in &r.evidence {
        t.push(vec![w.point.as_str().into(), w.series.to_string().into(), w.end.into(), w.increment.into(), w.partial_sum.into()]);
    }
    report.tables.push(t);
    match nonneg_probe(op, cfg.n_max, cfg.tolerances.zero)? {
        NonnegVerdict::NonNegUpTo(n) => {
            report.verdict("nonneg", true);
            report.verdict("nonneg_checked_to", n);
        }
        NonnegVerdict::NegativeAt { n, lambda_min } => {
            report.verdict("nonneg", false);
            report.verdict("negative_at", n);
            report.number("lambda_min", lambda_min);
        }
    }
    Ok(())
}

fn alpha(cfg: &RunConfig, op: &BlockJacobi, report: &mut Report) -> Result<(), CliError> {
    let a = alpha_estimate(op, cfg.alpha_depth, WINDOW, cfg.tolerances.alpha)?;
    report.number("alpha", a.value);
    report.number("cauchy_width", a.cauchy_width);
    report.verdict("window", a.window);
    report.verdict("n_used", a.n_used);
    if let Some(q) = &a.exact {
        report.verdict("alpha_decimal", decimal(q, cfg.precision_bits));
    }
    let mut t = Table::new("ratios", &["j", "ratio"]);
    for (j, r) in a.ratios.iter().enumerate() {
        t.push(vec![(j + 1).into(), (*r).into()]);
    }
    report.tables.push(t);
    Ok(())
}

fn matrix_columns(prefix: &str, p: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..p {
        for j in 0..p {
            let idx = if p == 1 { String::new() } else { format!("_{i}{j}") };
            out.push(format!("{prefix}{idx}_re"));
            out.push(format!("{prefix}{idx}_im"));
        }
    }
    out
}

fn matrix_cells(m: &CMat) -> Vec<Cell> {
    m.data().iter().flat_map(|z| [Cell::Num(z.re), Cell::Num(z.im)]).collect()
}

fn weyl(cfg: &RunConfig, op: &BlockJacobi, report: &mut Report) -> Result<(), CliError> {
    require_indeterminate(op, cfg.n_max)?;
    let p = op.p();
    let mut zs: Vec<C64> = cfg.grid.iter().map(|&x| C64::new(x, 0.0)).collect();
    zs.extend(cfg.points.iter().map(|z| C64::new(z[0], z[1])));
    let samples = weyl_grid(op, &zs, cfg.tolerances.weyl, cfg.n_max)?;
    let mut cols: Vec<String> = vec!["re".into(), "im".into()];
    cols.extend(matrix_columns("m", p));
    cols.extend(["n_used".into(), "truncation_gap".into(), "hermitian_defect".into()]);
    let mut t = Table { name: "samples".into(), columns: cols, rows: Vec::new() };
    for s in &samples {
        let mut row = vec![Cell::Num(s.z.re), Cell::Num(s.z.im)];
        row.extend(matrix_cells(&s.m));
        row.extend([s.n_used.into(), s.truncation_gap.into(), s.hermitian_defect.into()]);
        t.push(row);
    }
    report.tables.push(t);
    let real: Vec<_> = samples.iter().filter(|s| s.z.im == 0.0).cloned().collect();
    if real.len() >= 2 {
        report.verdict("monotone", matrix_monotone(&real, cfg.tolerances.zero)?);
    }

    match weyl_limit_minus_inf(op, &cfg.limit_grid, limit_tol(cfg), cfg.n_max) {
        Ok(l) => {
            report.verdict("limit_mode", json(&l.mode));
            let mut lt = Table::new("limit", &["x", "distance"]);
            for (s, d) in l.samples.iter().zip(&l.distances) {
                lt.push(vec![s.z.re.into(), (*d).into()]);
            }
            report.tables.push(lt);
            let mut mt = Table { name: "m_minus_inf".into(), columns: matrix_columns("m", p), rows: Vec::new() };
            mt.push(matrix_cells(&l.m_minus_inf));
            report.tables.push(mt);
            if let Some(a) = l.scalar() {
                report.number("m_minus_inf", a);
            }
            report.number("cauchy_spread", l.cauchy_spread);
            let last = l.distances.last().copied().unwrap_or(f64::NAN);
            report.number("limit_distance", last);
            let within = last <= limit_tol(cfg);
            report.verdict("limit_within_tol", within);
            if !within {
                report.warnings.push(format!("M at the last limit grid point is {last:e} from M(-inf)"));
            }
            report.warnings.extend(l.flags);
        }
        Err(e @ crate::weyl::WeylError::LimitNotSettled(_)) => {
            report.warnings.push(e.to_string());
            report.escalate(EXIT_INCONCLUSIVE);
        }
        Err(e) => return Err(e.into()),
    }

    let norms = weyl_zero_resolvent(op, &cfg.gammas, &cfg.zero_grid, cfg.n_max)?;
    let mut zt = Table::new("zero_resolvent", &["gamma", "x", "norm"]);
    for r in &norms {
        zt.push(vec![r.gamma.into(), r.x.into(), r.norm.into()]);
    }
    report.tables.push(zt);
    if cfg.zero_grid.len() >= 2 {
        let decays = cfg.gammas.iter().all(|&g| {
            let row: Vec<f64> = norms.iter().filter(|r| r.gamma == g).map(|r| r.norm).collect();
            matches!((row.first(), row.last()), (Some(a), Some(b)) if *b <= ZERO_DECAY * a)
        });
        report.verdict("zero_resolvent_decay", decays);
    }
    Ok(())
}

fn classification_name(c: Classification) -> String {
    match c {
        Classification::IsFriedrichs => "IsFriedrichs".into(),
        Classification::IsKrein => "IsKrein".into(),
        Classification::NonNeg => "NonNeg".into(),
        Classification::Indefinite(n) => format!("Indefinite({n})"),
    }
}

fn classify_cmd(cfg: &RunConfig, op: &BlockJacobi, report: &mut Report) -> Result<(), CliError> {
    let p = op.p();
    let limits = limits(cfg, op)?;
    if cfg.extensions.is_empty() {
        return Err(CliError::Validation { field: "extension".into(), msg: "classify needs at least one extension".into() });
    }
    if let Some(a) = limits.scalar() {
        report.number("alpha", a);
    }
    let tol = cfg.tolerances.zero;
    let mut t = Table::new("extensions", &["extension", "classification", "kappa_minus", "nonneg", "selfadjoint"]);
    let mut single = None;
    for e in &cfg.extensions {
        let spec = resolve(e, p, limits.scalar())?;
        let class = classify(&spec, &limits, tol)?;
        let kappa = kappa_minus(&spec, &limits, tol)?;
        let nonneg = nonneg_check(&spec, &limits, tol)?;
        let (c, d) = spec.pair(p, Some(&limits))?;
        let sa = selfadjoint_check(&c, &d, STRUCT_TOL)?;
        for w in class.warnings.iter().chain(&kappa.warnings) {
            if !report.warnings.contains(w) {
                report.warnings.push(w.clone());
            }
        }
        let name = classification_name(class.value);
        t.push(vec![spec.describe().into(), name.clone().into(), kappa.value.into(), nonneg.value.to_string().into(), sa.to_string().into()]);
        single = Some((spec.describe(), name, kappa.value, nonneg.value, sa));
    }
    if let (1, Some((ext, name, kappa, nonneg, sa))) = (cfg.extensions.len(), single) {
        report.verdict("extension", ext);
        report.verdict("classification", name);
        report.verdict("kappa_minus", kappa);
        report.verdict("nonneg", nonneg);
        report.verdict("selfadjoint", sa);
    }
    report.tables.push(t);
    Ok(())
}

fn spectrum(cfg: &RunConfig, op: &BlockJacobi, report: &mut Report) -> Result<(), CliError> {
    if cfg.extensions.len() > 1 {
        return Err(CliError::Validation { field: "extensions".into(), msg: "spectrum takes a single extension".into() });
    }
    let model = match cfg.extensions.first() {
        None => friedrichs_section(op, cfg.n)?,
        Some(e) => {
            require_indeterminate(op, cfg.n_max)?;
            let alpha = match needs_alpha(&cfg.extensions) {
                true => Some(scalar_alpha(cfg, op)?),
                false => None,
            };
            section(op, cfg.n, &resolve(e, op.p(), alpha)?)?
        }
    };
    report.verdict("section", model.label.clone());
    report.verdict("N", model.n);
    let ev = section_spectrum(&model)?;
    if let Some(&l) = ev.first() {
        report.number("lambda_min", l);
    }
    report.verdict("negative_count", ev.iter().filter(|&&l| l < -cfg.tolerances.zero).count());
    if let Some(r) = row_residual(&model) {
        report.verdict("row_residual", json(&r));
    }
    report.warnings.extend(model.flags.iter().cloned());
    let mut t = Table::new("eigenvalues", &["eigenvalue"]);
    for l in ev {
        t.push(vec![l.into()]);
    }
    report.tables.push(t);
    Ok(())
}

fn from_moments(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let Source::Moments(m) = &cfg.source else {
        return Err(CliError::Validation { field: "source".into(), msg: "from-moments needs a moments source".into() });
    };
    let seq = MomentSequence::new(m.clone()).map_err(|e| CliError::Validation { field: "source.moments".into(), msg: e.to_string() })?;
    report.verdict("support", format!("{:?}", seq.support_claim()));
    let (a, b2) = recurrence_from_moments(seq.moments())?;
    let bits = cfg.precision_bits;
    let mut t = Table::new("coefficients", &["j", "a_exact", "a", "b2_exact", "b2"]);
    for j in 0..a.len().max(b2.len()) {
        let pair = |v: Option<&BigRational>| match v {
            Some(q) => (Cell::Text(q.to_string()), Cell::Text(decimal(q, bits))),
            None => (Cell::Text(String::new()), Cell::Text(String::new())),
        };
        let (ae, ad) = pair(a.get(j));
        let (be, bd) = pair(b2.get(j));
        t.push(vec![j.into(), ae, ad, be, bd]);
    }
    report.tables.push(t);
    // the n-point rule must reproduce m_0..m_{2n-1}
    let n = a.len().min(b2.len() + 1);
    if n >= 1 {
        let g = gauss_rule_moments(&m[0], &a, &b2, n, (2 * n).min(m.len()));
        let ok = g.iter().zip(m.iter()).all(|(x, y)| x == y);
        report.verdict("gauss_rule_nodes", n);
        report.verdict("gauss_rule_exact", ok);
        if !ok {
            report.escalate(EXIT_NUMERIC);
        }
    }
    Ok(())
}

/// Outcome of one invariant suite.
enum Suite {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn suite(r: Result<(bool, String), CliError>) -> Suite {
    match r {
        Ok((true, d)) => Suite::Pass(d),
        Ok((false, d)) => Suite::Fail(d),
        Err(e) if e.exit_code() == EXIT_INCONCLUSIVE => Suite::Skip(e.to_string()),
        Err(e) => Suite::Fail(e.to_string()),
    }
}

fn rand_q<R: Rng>(rng: &mut R) -> BigRational {
    let d = rng.gen_range(1..=1_000_000i64);
    BigRational::ratio(rng.gen_range(-1_000_000..=1_000_000), d).expect("nonzero denominator")
}

fn field_axioms(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = BigRational::zero();
    let one = BigRational::one();
    let trials = 200;
    for _ in 0..trials {
        let (a, b, c) = (rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng));
        let ok = &a + &b == &b + &a
            && &a * &b == &b * &a
            && (&a + &b) + &c == &a + &(&b + &c)
            && (&a * &b) * &c == &a * &(&b * &c)
            && &a * &(&b + &c) == &(&a * &b) + &(&a * &c)
            && &a + &zero == a
            && &a * &one == a
            && &a + &(-a.clone()) == zero
            && (a.is_zero() || &a * &a.recip().expect("nonzero") == one);
        if !ok {
            return (false, format!("axiom violated at a={a}, b={b}, c={c}"));
        }
    }
    (true, format!("{trials} random triples"))
}

fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    m.hermitian_part()
}

fn eigen_residuals(seed: u64) -> Result<(bool, String), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        let h = random_hermitian(n, &mut rng);
        let e = hermitian_eigen(&h, 1e-14)?;
        let hv = &h * &e.vectors;
        let vl = &e.vectors * &CMat::diag_real(&e.values);
        let ortho = &(&e.vectors.adjoint() * &e.vectors) - &CMat::identity(n);
        worst = worst.max((&hv - &vl).frob_norm() / h.frob_norm().max(1.0)).max(ortho.frob_norm());
    }
    Ok((worst <= 1e-10, format!("worst residual {worst:e}")))
}

fn inertia_congruence(seed: u64) -> Result<(bool, String), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 2..=10 {
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let h = CMat::diag_real(&d);
        let mut s = CMat::identity(n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] += C64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            }
        }
        let shs = (&(&s * &h) * &s.adjoint()).hermitian_part();
        let (a, b) = (inertia(&h, 1e-9)?, inertia(&shs, 1e-9)?);
        if a != b {
            return Ok((false, format!("n = {n}: {a:?} vs {b:?}")));
        }
    }
    Ok((true, "n = 2..10".into()))
}

fn kernel_identity(op: &BlockJacobi, cfg: &RunConfig) -> Result<(bool, String), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..KERNEL_VECTORS {
        let s = rng.gen_range(0..=KERNEL_SUPPORT);
        let f = random_finite_vector(op, s, &mut rng)?;
        let b = boundary_sums(op, &f)?;
        let n0 = b.gamma0_part.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let n1 = b.gamma1_part.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(n0).max(n1);
    }
    Ok((worst <= cfg.tolerances.kernel, format!("worst {worst:e} over {KERNEL_VECTORS} vectors")))
}

fn green_identity(op: &BlockJacobi, cfg: &RunConfig) -> Result<(bool, String), CliError> {
    let t = Triplet::new(op, cfg.n_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p = op.p();
    let draw = |rng: &mut ChaCha8Rng| -> Result<DomainVector, CliError> {
        let s = rng.gen_range(0..=10);
        let f = random_finite_vector(op, s, rng)?;
        Ok(DomainVector::new(f, random_tail(p, rng), random_tail(p, rng)))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..GREEN_PAIRS {
        let (u, v) = (draw(&mut rng)?, draw(&mut rng)?);
        worst = worst.max(t.green_residual(&u, &v)?);
    }
    Ok((worst <= cfg.tolerances.green, format!("worst {worst:e} over {GREEN_PAIRS} pairs")))
}

fn krein_kernel(op: &BlockJacobi, cfg: &RunConfig) -> Result<(bool, String), CliError> {
    let s = krein_section(op, cfg.n)?;
    let r = row_residual(&s).expect("corner section");
    let mut ok = r.relative <= SECTION_TOL;
    let mut detail = format!("relative row residual {:e}", r.relative);
    if op.p() == 1 {
        let l = section_spectrum(&s)?[0];
        ok &= l.abs() <= SECTION_TOL;
        detail.push_str(&format!(", lambda_min {l:e}"));
    }
    Ok((ok, detail))
}

fn ordering(op: &BlockJacobi, cfg: &RunConfig, alpha: f64) -> Result<(bool, String), CliError> {
    let hs: Vec<f64> = match cfg.h_list.is_empty() {
        true => vec![f64::NEG_INFINITY, -1e3, alpha - 10.0, alpha - 1.0, alpha],
        false => cfg
            .h_list
            .iter()
            .map(|e| match resolve(e, 1, Some(alpha))? {
                ExtensionSpec::ScalarH(h) => Ok(h),
                ExtensionSpec::Krein => Ok(f64::NEG_INFINITY),
                ExtensionSpec::Friedrichs => Ok(alpha),
                ExtensionSpec::Pair { .. } => Err(CliError::Validation { field: "h_list".into(), msg: "pairs are not values of h".into() }),
            })
            .collect::<Result<_, _>>()?,
    };
    let r = ordering_check(op, cfg.n, &hs, 1.0, ORDER_TRIALS, cfg.seed)?;
    Ok((r.passed, format!("worst increase {:e}", r.worst_increase)))
}

fn kappa_agreement(op: &BlockJacobi, cfg: &RunConfig, limits: &WeylLimits, alpha: f64) -> Result<(bool, String), CliError> {
    let mut detail = Vec::new();
    let mut ok = true;
    for h in [alpha - 0.5, alpha + alpha.abs() / 2.0] {
        let spec = ExtensionSpec::ScalarH(h);
        let predicted = kappa_minus(&spec, limits, cfg.tolerances.zero)?.value;
        let seen = kappa_empirical(op, cfg.n, &spec)?;
        ok &= predicted == seen;
        detail.push(format!("h={}: {seen}/{predicted}", super::fmt_g17(h)));
    }
    Ok((ok, detail.join(", ")))
}

fn validate(cfg: &RunConfig, op: &BlockJacobi, report: &mut Report) -> Result<(), CliError> {
    let mut rows: Vec<(&str, Suite)> = vec![
        ("exactq.field_axioms", suite(Ok(field_axioms(cfg.seed)))),
        ("numkernel.eigen_residual", suite(eigen_residuals(cfg.seed))),
        ("numkernel.inertia_congruence", suite(inertia_congruence(cfg.seed))),
    ];
    rows.push((
        "operator.nonneg",
        suite(nonneg_probe(op, cfg.n_max, cfg.tolerances.zero).map_err(CliError::from).map(|v| match v {
            NonnegVerdict::NonNegUpTo(n) => (true, format!("sections up to {n}")),
            NonnegVerdict::NegativeAt { n, lambda_min } => (false, format!("N = {n}: lambda_min {lambda_min:e}")),
        })),
    ));
    rows.push((
        "polys.recurrence",
        suite((|| {
            let t = eval_polys(op, C64::new(-1.0, 0.5), 50, false)?;
            let r = t.recurrence_residual(op)?;
            Ok((r <= 1e-12, format!("relative residual {r:e}")))
        })()),
    ));
    rows.push(("triplet.kernel_identity", suite(kernel_identity(op, cfg))));
    let probe = deficiency_probe(op, cfg.n_max, cfg.tolerances.probe)?;
    rows.push((
        "polys.deficiency_probe",
        match probe.verdict {
            Verdict::Inconclusive => Suite::Fail("inconclusive".into()),
            v => Suite::Pass(verdict_name(v).into()),
        },
    ));
    let ci_names = [
        "polys.alpha",
        "weyl.herglotz",
        "weyl.monotone",
        "triplet.green_identity",
        "sections.krein_kernel",
        "sections.ordering",
        "sections.kappa",
    ];
    if probe.verdict != Verdict::CompletelyIndeterminate {
        let why = format!("needs complete indeterminacy, probe says {}", verdict_name(probe.verdict));
        rows.extend(ci_names.iter().map(|n| (*n, Suite::Skip(why.clone()))));
    } else {
        let lim = limits(cfg, op);
        let alpha = lim.as_ref().ok().and_then(|l| l.scalar());
        rows.push((
            ci_names[0],
            match (op.p(), &lim) {
                (1, Ok(l)) => {
                    let a = l.alpha.as_ref().expect("scalar limits carry alpha");
                    Suite::Pass(format!("alpha {} with spread {:e}", super::fmt_g17(a.value), a.cauchy_width))
                }
                (1, Err(e)) => match e.exit_code() {
                    EXIT_INCONCLUSIVE => Suite::Skip(e.to_string()),
                    _ => Suite::Fail(e.to_string()),
                },
                _ => Suite::Skip("scalar operators only".into()),
            },
        ));
        let pts = [C64::new(0.0, 1.0), C64::new(-1.0, 1.0), C64::new(2.0, 0.5)];
        rows.push((ci_names[1], suite(herglotz_check(op, &pts, cfg.n_max).map(|b| (b, "3 points".into())).map_err(Into::into))));
        rows.push((
            ci_names[2],
            suite((|| {
                let zs: Vec<C64> = cfg.grid.iter().map(|&x| C64::new(x, 0.0)).collect();
                let s = weyl_grid(op, &zs, cfg.tolerances.weyl, cfg.n_max)?;
                Ok((matrix_monotone(&s, cfg.tolerances.zero)?, format!("{} grid points", zs.len())))
            })()),
        ));
        rows.push((ci_names[3], suite(green_identity(op, cfg))));
        rows.push((ci_names[4], suite(krein_kernel(op, cfg))));
        match (op.p(), alpha, &lim) {
            (1, Some(a), Ok(l)) => {
                rows.push((ci_names[5], suite(ordering(op, cfg, a))));
                rows.push((ci_names[6], suite(kappa_agreement(op, cfg, l, a))));
            }
            (1, _, _) => {
                rows.push((ci_names[5], Suite::Skip("alpha unavailable".into())));
                rows.push((ci_names[6], Suite::Skip("alpha unavailable".into())));
            }
            _ => {
                rows.push((ci_names[5], Suite::Skip("scalar operators only".into())));
                rows.push((ci_names[6], Suite::Skip("scalar operators only".into())));
            }
        }
    }
    let mut t = Table::new("suites", &["suite", "status", "detail"]);
    let (mut passed, mut failed, mut skipped) = (0usize, 0usize, 0usize);
    for (name, s) in rows {
        let (status, detail) = match s {
            Suite::Pass(d) => {
                passed += 1;
                ("pass", d)
            }
            Suite::Fail(d) => {
                failed += 1;
                ("fail", d)
            }
            Suite::Skip(d) => {
                skipped += 1;
                ("skipped", d)
            }
        };
        t.push(vec![name.into(), status.into(), detail.into()]);
    }
    report.tables.push(t);
    report.verdict("passed", passed);
    report.verdict("failed", failed);
    report.verdict("skipped", skipped);
    if failed > 0 {
        report.escalate(EXIT_NUMERIC);
    }
    Ok(())
}
