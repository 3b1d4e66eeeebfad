//! Finite sections whose last diagonal block is modified so that a chosen
//! tail direction satisfies the final row, one section per extension.
//!
//! For `u = P(0)C - Q(0)D` one has `J u = -e₀ ⊗ D`, and the rows `0..N-2` of
//! this identity only involve `u_0..u_{N-1}`. Row `N-1` also involves `u_N`;
//! replacing `A_{N-1}` by `A_{N-1} + B_{N-1} u_N u_{N-1}⁻¹` makes the truncated
//! vector satisfy it as well. `D = O` gives the Krein section, the scalar pair
//! `(h, 1)` the member `h` of the family, and the unmodified truncation stands
//! in for the Friedrichs extension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactq::{BigRational, ExactTridiag};
use crate::numkernel::{hermitian_eigen, invert, CMat, MpFloat, NumError, C64, DEFAULT_TOL, DEFAULT_ZERO_TOL};
use crate::operator::{exact_section, finite_section, BlockJacobi, OpError};
use crate::polys::{
    alpha_estimate, deficiency_probe, eval_polys, exact_alpha, exact_table, ExactScalarTable, PolyError, Verdict,
    ALPHA_ACCURACY, PROBE_TOL, WINDOW,
};
use crate::triplet::ExtensionSpec;

/// Eigenvalues below `-ZERO_TOL` count as negative.
pub const ZERO_TOL: f64 = DEFAULT_ZERO_TOL;
/// Slack allowed in the resolvent ordering.
pub const ORDER_TOL: f64 = 1e-8;
/// Extra depth used for the rational `α` inside an ordering check.
pub const ALPHA_EXTRA_DEPTH: usize = 20;
const EIG_REL: f64 = 1e-18;
const EIG_ABS: f64 = 1e-30;
const PIVOT_TOL: f64 = 1e-13;
const PROBE_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SectionError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Operator(#[from] OpError),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error("section size must be at least 1")]
    Empty,
    #[error("P_{n}(0) is singular; retry at N ± 1")]
    SingularPAtN { n: usize },
    #[error("corner denominator u_{n} vanishes")]
    ZeroCornerDenominator { n: usize },
    #[error("scalar extension parameters need p = 1")]
    NotScalar,
    #[error("h = {h} lies above alpha = {alpha}")]
    AboveAlpha { h: f64, alpha: f64 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

/// Truncated tail direction used for the last-row modification.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    /// `u_0..u_N`, normalized to `P(0) + tQ(0)` (or `Q(0)` when `C = 0`).
    pub u: Vec<CMat>,
    /// `t` in `J u = t·e₀`.
    pub rhs: f64,
    exact: Option<ExactCorner>,
}

/// Monic form `g_j = Cπ_j - Dσ_j` with `u_j = g_j / (s √n_j)`.
#[derive(Debug, Clone, PartialEq)]
struct ExactCorner {
    d: BigRational,
    g: Vec<BigRational>,
    norm: Vec<BigRational>,
    s: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionModel {
    pub label: String,
    pub n: usize,
    pub target: ExtensionSpec,
    /// `pN×pN` Hermitian matrix.
    pub matrix: CMat,
    /// Rational copy for scalar operators with exact coefficients.
    pub exact: Option<ExactTridiag>,
    /// Absent for the plain truncation.
    pub corner: Option<Corner>,
    pub flags: Vec<String>,
}

impl SectionModel {
    pub fn p(&self) -> usize {
        self.matrix.rows() / self.n
    }
}

/// Pair `(C, D)` of a scalar extension as exact rationals.
fn scalar_pair(spec: &ExtensionSpec) -> Result<(BigRational, BigRational), SectionError> {
    let q = |x: f64| BigRational::from_f64(x).ok_or_else(|| SectionError::BadParameter(format!("{x}")));
    match spec {
        ExtensionSpec::ScalarH(h) if *h == f64::NEG_INFINITY => Ok((BigRational::one(), BigRational::zero())),
        ExtensionSpec::ScalarH(h) if h.is_finite() => Ok((q(*h)?, BigRational::one())),
        ExtensionSpec::ScalarH(h) => Err(SectionError::BadParameter(format!("h = {h}"))),
        ExtensionSpec::Krein => Ok((BigRational::one(), BigRational::zero())),
        ExtensionSpec::Pair { c, d } if c.rows() == 1 && c.cols() == 1 && d.rows() == 1 && d.cols() == 1 => {
            if c[(0, 0)].im != 0.0 || d[(0, 0)].im != 0.0 {
                return Err(SectionError::BadParameter("scalar pair must be real".into()));
            }
            let (c, d) = (q(c[(0, 0)].re)?, q(d[(0, 0)].re)?);
            if c.is_zero() && d.is_zero() {
                return Err(SectionError::BadParameter("C = D = 0".into()));
            }
            Ok((c, d))
        }
        ExtensionSpec::Pair { .. } => Err(SectionError::NotScalar),
        ExtensionSpec::Friedrichs => Err(SectionError::BadParameter("the Friedrichs section has no corner".into())),
    }
}

fn check_n(n: usize) -> Result<(), SectionError> {
    match n {
        0 => Err(SectionError::Empty),
        _ => Ok(()),
    }
}

fn indeterminacy_flags(op: &BlockJacobi) -> Result<Vec<String>, SectionError> {
    let r = deficiency_probe(op, PROBE_DEPTH, PROBE_TOL)?;
    Ok(match r.verdict {
        Verdict::CompletelyIndeterminate => Vec::new(),
        v => vec![format!("operator is not completely indeterminate ({v:?}); the corner section is formal")],
    })
}

/// Unmodified truncation `J_N`.
pub fn friedrichs_section(op: &BlockJacobi, n: usize) -> Result<SectionModel, SectionError> {
    check_n(n)?;
    let exact = exact_section(op, n).transpose()?;
    Ok(SectionModel {
        label: op.label().to_string(),
        n,
        target: ExtensionSpec::Friedrichs,
        matrix: finite_section(op, n)?,
        exact,
        corner: None,
        flags: Vec::new(),
    })
}

/// Corner section with `u = P(0)`, so `(P_0(0), …, P_{N-1}(0))` spans its kernel.
pub fn krein_section(op: &BlockJacobi, n: usize) -> Result<SectionModel, SectionError> {
    check_n(n)?;
    let flags = indeterminacy_flags(op)?;
    let mut s = match op.has_exact() {
        true => exact_corner_section(op, n, &BigRational::one(), &BigRational::zero(), None),
        false => float_krein_section(op, n),
    }
    .map_err(|e| match e {
        SectionError::ZeroCornerDenominator { n } => SectionError::SingularPAtN { n },
        e => e,
    })?;
    s.target = ExtensionSpec::Krein;
    s.flags = flags;
    Ok(s)
}

/// Corner section for `Γ₁u = hΓ₀u`; `h = -∞` gives the Krein section.
pub fn h_section(op: &BlockJacobi, n: usize, h: f64) -> Result<SectionModel, SectionError> {
    if h == f64::NEG_INFINITY {
        let mut s = krein_section(op, n)?;
        s.target = ExtensionSpec::ScalarH(h);
        return Ok(s);
    }
    pair_section(op, n, &ExtensionSpec::ScalarH(h))
}

/// Corner section for a scalar pair `(C, D)`, given as `Pair` or `ScalarH`.
pub fn pair_section(op: &BlockJacobi, n: usize, spec: &ExtensionSpec) -> Result<SectionModel, SectionError> {
    check_n(n)?;
    if op.p() != 1 {
        return Err(SectionError::NotScalar);
    }
    let (c, d) = scalar_pair(spec)?;
    let flags = indeterminacy_flags(op)?;
    let mut s = match op.has_exact() {
        true => exact_corner_section(op, n, &c, &d, None)?,
        false => float_pair_section(op, n, c.to_f64().unwrap_or(f64::NAN), d.to_f64().unwrap_or(f64::NAN))?,
    };
    s.target = spec.clone();
    s.flags = flags;
    Ok(s)
}

/// Dispatches on the extension: plain truncation for Friedrichs, corner
/// sections otherwise. Block operators support Friedrichs and Krein only.
pub fn section(op: &BlockJacobi, n: usize, spec: &ExtensionSpec) -> Result<SectionModel, SectionError> {
    match spec {
        ExtensionSpec::Friedrichs => friedrichs_section(op, n),
        ExtensionSpec::Krein => krein_section(op, n),
        ExtensionSpec::ScalarH(h) => h_section(op, n, *h),
        ExtensionSpec::Pair { d, .. } if op.p() > 1 && d.max_abs() == 0.0 => {
            let mut s = krein_section(op, n)?;
            s.target = spec.clone();
            Ok(s)
        }
        ExtensionSpec::Pair { .. } => pair_section(op, n, spec),
    }
}

/// Builds the exact corner section; `table` may carry precomputed monic
/// values at `z = 0` to any depth `≥ N`.
fn exact_corner_section(
    op: &BlockJacobi,
    n: usize,
    c: &BigRational,
    d: &BigRational,
    table: Option<&ExactScalarTable>,
) -> Result<SectionModel, SectionError> {
    let owned;
    let t = match table {
        Some(t) => t,
        None => {
            owned = exact_table(op, &BigRational::zero(), n)?;
            &owned
        }
    };
    let g: Vec<BigRational> = (0..=n).map(|j| t.combination(c, d, j)).collect();
    if g[n - 1].is_zero() {
        return Err(SectionError::ZeroCornerDenominator { n: n - 1 });
    }
    let corner = &t.a[n - 1] + &g[n].checked_div(&g[n - 1]).map_err(PolyError::from)?;
    let base = exact_tridiag_from_table(t, n)?;
    let exact = base.with_last_diag(corner.clone());
    let mut matrix = finite_section(op, n)?;
    matrix[(n - 1, n - 1)] = C64::new(corner.to_f64().unwrap_or(f64::NAN), 0.0);
    if !matrix[(n - 1, n - 1)].re.is_finite() {
        return Err(SectionError::Numeric(NumError::NonFinite));
    }
    let s = if c.is_zero() { -d } else { c.clone() };
    let rhs = (-d).checked_div(&s).map_err(PolyError::from)?.to_f64().unwrap_or(f64::NAN);
    let u = (0..=n)
        .map(|j| {
            let v = g[j].checked_div(&s).expect("nonzero normalization");
            CMat::scalar(t.orthonormal(&v, j))
        })
        .collect();
    let exact_corner = ExactCorner { d: d.clone(), g, norm: t.norm[..=n].to_vec(), s };
    Ok(SectionModel {
        label: op.label().to_string(),
        n,
        target: ExtensionSpec::Pair { c: CMat::scalar(c.to_f64().unwrap_or(f64::NAN)), d: CMat::scalar(d.to_f64().unwrap_or(f64::NAN)) },
        matrix,
        exact: Some(exact),
        corner: Some(Corner { u, rhs, exact: Some(exact_corner) }),
        flags: Vec::new(),
    })
}

fn exact_tridiag_from_table(t: &ExactScalarTable, n: usize) -> Result<ExactTridiag, SectionError> {
    let offsq = t.b2[..n - 1].to_vec();
    if let Some(j) = offsq.iter().position(|x| !x.is_positive()) {
        return Err(OpError::ZeroOffDiagonal { j }.into());
    }
    Ok(ExactTridiag::new(t.a[..n].to_vec(), offsq))
}

fn float_krein_section(op: &BlockJacobi, n: usize) -> Result<SectionModel, SectionError> {
    let p = op.p();
    let t = eval_polys(op, C64::new(0.0, 0.0), n, false)?;
    let inv = invert(&t.p[n - 1], PIVOT_TOL).map_err(|_| SectionError::SingularPAtN { n: n - 1 })?;
    let b = op.blocks(n - 1)?;
    let corner = (&b.a + &(&(&b.b * &t.p[n]) * &inv)).hermitian_part();
    if !corner.is_finite() {
        return Err(SectionError::Numeric(NumError::NonFinite));
    }
    let mut matrix = finite_section(op, n)?;
    matrix.set_block((n - 1) * p, (n - 1) * p, &corner);
    Ok(SectionModel {
        label: op.label().to_string(),
        n,
        target: ExtensionSpec::Krein,
        matrix,
        exact: None,
        corner: Some(Corner { u: t.p, rhs: 0.0, exact: None }),
        flags: Vec::new(),
    })
}

fn float_pair_section(op: &BlockJacobi, n: usize, c: f64, d: f64) -> Result<SectionModel, SectionError> {
    let t = eval_polys(op, C64::new(0.0, 0.0), n, false)?;
    let s = if c == 0.0 { -d } else { c };
    let u: Vec<CMat> = (0..=n).map(|j| (&t.p[j].scale_real(c) - &t.q[j].scale_real(d)).scale_real(1.0 / s)).collect();
    let den = u[n - 1][(0, 0)].re;
    let size = (t.p[n - 1][(0, 0)].re * c / s).abs() + (t.q[n - 1][(0, 0)].re * d / s).abs();
    if den == 0.0 || den.abs() <= PIVOT_TOL * size {
        return Err(SectionError::ZeroCornerDenominator { n: n - 1 });
    }
    let b = op.blocks(n - 1)?;
    let corner = b.a[(0, 0)].re + b.b[(0, 0)].re * u[n][(0, 0)].re / den;
    if !corner.is_finite() {
        return Err(SectionError::Numeric(NumError::NonFinite));
    }
    let mut matrix = finite_section(op, n)?;
    matrix[(n - 1, n - 1)] = C64::new(corner, 0.0);
    Ok(SectionModel {
        label: op.label().to_string(),
        n,
        target: ExtensionSpec::Pair { c: CMat::scalar(c), d: CMat::scalar(d) },
        matrix,
        exact: None,
        corner: Some(Corner { u, rhs: -d / s, exact: None }),
        flags: Vec::new(),
    })
}

/// Ascending eigenvalues; bisection with exact Sturm counts when a rational
/// copy exists, the dense eigensolver otherwise.
pub fn section_spectrum(s: &SectionModel) -> Result<Vec<f64>, SectionError> {
    match &s.exact {
        Some(t) => Ok(t.eigenvalues(EIG_REL, EIG_ABS)),
        None => Ok(hermitian_eigen(&s.matrix, DEFAULT_TOL)?.values),
    }
}

/// Eigenvalues strictly below `cutoff`, ascending.
pub fn section_eigenvalues_below(s: &SectionModel, cutoff: f64) -> Result<Vec<f64>, SectionError> {
    match &s.exact {
        Some(t) => {
            let c = BigRational::from_f64(cutoff).ok_or_else(|| SectionError::BadParameter(format!("cutoff {cutoff}")))?;
            Ok(t.eigenvalues_below(&c, EIG_REL, EIG_ABS))
        }
        None => Ok(section_spectrum(s)?.into_iter().filter(|&l| l < cutoff).collect()),
    }
}

/// Residual of `matrix · (u_0, …, u_{N-1}) = t·e₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowResidual {
    /// Euclidean (Frobenius for blocks) norm of the residual.
    pub norm: f64,
    /// Norm of the truncated corner vector.
    pub u_norm: f64,
    /// Largest row residual relative to the largest term of that row.
    pub relative: f64,
    /// Computed in rationals.
    pub exact: bool,
}

/// Row residual of the corner vector; `None` for the plain truncation.
pub fn row_residual(s: &SectionModel) -> Option<RowResidual> {
    let corner = s.corner.as_ref()?;
    let n = s.n;
    let u_norm = corner.u[..n].iter().map(|m| m.frob_norm().powi(2)).sum::<f64>().sqrt();
    if let (Some(t), Some(ec)) = (&s.exact, &corner.exact) {
        return Some(exact_row_residual(t, ec, u_norm));
    }
    let p = s.p();
    let (mut sq, mut rel) = (0.0f64, 0.0f64);
    for k in 0..n {
        let mut r = CMat::zeros(p, p);
        let mut big = 0.0f64;
        for j in k.saturating_sub(1)..(k + 2).min(n) {
            let term = &s.matrix.block(k * p, j * p, p, p) * &corner.u[j];
            big = big.max(term.frob_norm());
            r = &r + &term;
        }
        if k == 0 {
            r = &r - &CMat::identity(p).scale_real(corner.rhs);
            big = big.max(corner.rhs.abs() * (p as f64).sqrt());
        }
        let rn = r.frob_norm();
        sq += rn * rn;
        if rn > 0.0 {
            rel = rel.max(rn / big.max(f64::MIN_POSITIVE));
        }
    }
    Some(RowResidual { norm: sq.sqrt(), u_norm, relative: rel, exact: false })
}

/// Monic rows `b²_{k-1} g_{k-1} + d_k g_k + g_{k+1} + D δ_{k0}`; the true
/// residual entry is that value over `s √n_k`.
fn exact_row_residual(t: &ExactTridiag, ec: &ExactCorner, u_norm: f64) -> RowResidual {
    let n = t.n();
    let (mut sq, mut rel) = (0.0f64, 0.0f64);
    for k in 0..n {
        let mut terms = vec![&t.diag()[k] * &ec.g[k]];
        if k > 0 {
            terms.push(&t.offsq()[k - 1] * &ec.g[k - 1]);
        }
        if k + 1 < n {
            terms.push(ec.g[k + 1].clone());
        }
        if k == 0 {
            terms.push(ec.d.clone());
        }
        let r: BigRational = terms.iter().sum();
        if r.is_zero() {
            continue;
        }
        let big = terms.iter().map(|x| x.abs()).max().expect("nonempty");
        rel = rel.max(r.abs().checked_div(&big).ok().and_then(|x| x.to_f64()).unwrap_or(f64::INFINITY));
        let scaled = (&r * &r).checked_div(&(&(&ec.s * &ec.s) * &ec.norm[k])).expect("positive norm");
        sq += scaled.to_f64().unwrap_or(f64::INFINITY);
    }
    RowResidual { norm: sq.sqrt(), u_norm, relative: rel, exact: true }
}

/// Number of eigenvalues below `-ZERO_TOL` of the corner section for `spec`.
pub fn kappa_empirical(op: &BlockJacobi, n: usize, spec: &ExtensionSpec) -> Result<usize, SectionError> {
    let s = match spec {
        ExtensionSpec::Friedrichs => friedrichs_section(op, n)?,
        _ if op.p() != 1 => return Err(SectionError::NotScalar),
        _ => section(op, n, spec)?,
    };
    count_negative(&s)
}

fn count_negative(s: &SectionModel) -> Result<usize, SectionError> {
    match &s.exact {
        Some(t) => Ok(t.count_below(&-BigRational::from_f64(ZERO_TOL).expect("finite"))),
        None => Ok(hermitian_eigen(&s.matrix, DEFAULT_TOL)?.values.iter().filter(|&&l| l < -ZERO_TOL).count()),
    }
}

/// Negative-eigenvalue counts of the corner sections `N = 1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaScan {
    pub target: String,
    pub predicted: usize,
    /// `counts[N - 1]`; `None` where the corner denominator vanished.
    pub counts: Vec<Option<usize>>,
    /// Smallest `N₀` with `counts[N] = predicted` for all `N₀ ≤ N ≤ n_max`.
    pub onset: Option<usize>,
}

/// Scans `N = 1..=n_max` and reports the onset of agreement with `predicted`.
pub fn kappa_scan(op: &BlockJacobi, spec: &ExtensionSpec, predicted: usize, n_max: usize) -> Result<KappaScan, SectionError> {
    check_n(n_max)?;
    if op.p() != 1 {
        return Err(SectionError::NotScalar);
    }
    let counts: Vec<Option<usize>> = match (op.has_exact(), spec) {
        (true, ExtensionSpec::Friedrichs) => {
            let t = exact_section(op, n_max).transpose()?.expect("exact operator");
            t.sturm(&-BigRational::from_f64(ZERO_TOL).expect("finite")).below.into_iter().map(Some).collect()
        }
        (true, _) => {
            let (c, d) = scalar_pair(spec)?;
            let t = exact_table(op, &BigRational::zero(), n_max)?;
            (1..=n_max)
                .into_par_iter()
                .map(|n| match exact_corner_section(op, n, &c, &d, Some(&t)) {
                    Ok(s) => count_negative(&s).map(Some),
                    Err(SectionError::ZeroCornerDenominator { .. }) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_, _>>()?
        }
        (false, _) => (1..=n_max)
            .into_par_iter()
            .map(|n| match kappa_empirical(op, n, spec) {
                Ok(k) => Ok(Some(k)),
                Err(SectionError::ZeroCornerDenominator { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_, _>>()?,
    };
    let tail = counts.iter().rev().take_while(|&&c| c == Some(predicted)).count();
    let onset = (tail > 0).then(|| n_max - tail + 1);
    Ok(KappaScan { target: spec.describe(), predicted, counts, onset })
}

/// Quadratic forms `((S_h + a)⁻¹ v, v)` for every `h` and trial vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub passed: bool,
    pub h_list: Vec<f64>,
    /// `forms[i][k]` for `h_list[i]` and trial `k`.
    pub forms: Vec<Vec<f64>>,
    /// Largest increase of a form from one `h` to the next, relative to `max(1, |form|)`.
    pub worst_increase: f64,
    pub alpha: f64,
}

/// Checks that `((S_h + a)⁻¹ v, v)` does not increase along `h_list` for
/// `trials` random unit vectors. With `h_list` ascending this is the Krein
/// ordering; the list is used as given, so a reversed list is expected to fail.
/// Entries within `1e-12` of `α` use the rational `α` at depth `N + 20`.
pub fn ordering_check(
    op: &BlockJacobi,
    n: usize,
    h_list: &[f64],
    a: f64,
    trials: usize,
    seed: u64,
) -> Result<OrderingReport, SectionError> {
    check_n(n)?;
    if op.p() != 1 {
        return Err(SectionError::NotScalar);
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(SectionError::BadParameter(format!("shift a = {a} must be positive")));
    }
    let exact_alpha = exact_alpha(op, n + ALPHA_EXTRA_DEPTH).transpose()?;
    let alpha = match &exact_alpha {
        Some(q) => q.to_f64().unwrap_or(f64::NAN),
        None => alpha_estimate(op, (n + ALPHA_EXTRA_DEPTH).max(WINDOW + 1), WINDOW, ALPHA_ACCURACY)?.value,
    };
    let near = |h: f64| (h - alpha).abs() <= 1e-12 * alpha.abs().max(1.0);
    for &h in h_list {
        if h.is_nan() || (h > alpha && !near(h)) {
            return Err(SectionError::AboveAlpha { h, alpha });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors: Vec<Vec<f64>> = (0..trials)
        .map(|_| {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            v.into_iter().map(|x| x / nv).collect()
        })
        .collect();
    let forms: Vec<Vec<f64>> = h_list
        .par_iter()
        .map(|&h| {
            let s = match (&exact_alpha, near(h)) {
                (Some(q), true) => {
                    let mut s = exact_corner_section(op, n, q, &BigRational::one(), None)?;
                    s.target = ExtensionSpec::ScalarH(h);
                    s
                }
                _ => h_section(op, n, h)?,
            };
            resolvent_forms(&s, a, &vectors)
        })
        .collect::<Result<_, _>>()?;
    let mut worst = f64::NEG_INFINITY;
    for w in forms.windows(2) {
        for (x, y) in w[0].iter().zip(&w[1]) {
            worst = worst.max((y - x) / x.abs().max(1.0));
        }
    }
    let passed = forms.len() < 2 || trials == 0 || worst <= ORDER_TOL;
    Ok(OrderingReport { passed, h_list: h_list.to_vec(), forms, worst_increase: worst.max(0.0), alpha })
}

/// Rational diagonal and squared off-diagonal of a scalar section.
fn tridiag_rationals(s: &SectionModel) -> Result<(Vec<BigRational>, Vec<BigRational>), SectionError> {
    if let Some(t) = &s.exact {
        return Ok((t.diag().to_vec(), t.offsq().to_vec()));
    }
    let q = |x: f64| BigRational::from_f64(x).ok_or(SectionError::Numeric(NumError::NonFinite));
    let diag = (0..s.n).map(|k| q(s.matrix[(k, k)].re)).collect::<Result<_, _>>()?;
    let offsq = (1..s.n).map(|k| q(s.matrix[(k - 1, k)].re).map(|b| b.square())).collect::<Result<_, _>>()?;
    Ok((diag, offsq))
}

/// `((S + a)⁻¹ v, v)` through an `LDLᵀ` factorization carried out with
/// enough bits to absorb the range of the entries.
fn resolvent_forms(s: &SectionModel, a: f64, vectors: &[Vec<f64>]) -> Result<Vec<f64>, SectionError> {
    if s.p() != 1 {
        return Err(SectionError::NotScalar);
    }
    let (diag, offsq) = tridiag_rationals(s)?;
    let log2 = |q: &BigRational| q.numer().bits() as i64 - q.denom().bits() as i64;
    let top = diag.iter().map(log2).chain(offsq.iter().map(|o| log2(o) / 2)).max().unwrap_or(0).max(0);
    let prec = (96 + 2 * top) as u32;
    let shift = BigRational::from_f64(a).expect("finite shift");
    let mut d: Vec<MpFloat> = Vec::with_capacity(s.n);
    let mut l: Vec<MpFloat> = Vec::with_capacity(s.n);
    for k in 0..s.n {
        let mut dk = MpFloat::from_rational(&(&diag[k] + &shift), prec);
        if k > 0 {
            let osq = MpFloat::from_rational(&offsq[k - 1], prec);
            dk = dk.sub(&osq.div(&d[k - 1]));
            l.push(MpFloat::from_rational(&offsq[k - 1], prec).sqrt().div(&d[k - 1]));
        }
        if dk.is_zero() {
            return Err(SectionError::Numeric(NumError::Singular { pivot: 0.0, threshold: 0.0 }));
        }
        d.push(dk);
    }
    Ok(vectors
        .iter()
        .map(|v| {
            let mut acc = MpFloat::zero(prec);
            let mut y_prev = MpFloat::zero(prec);
            for k in 0..s.n {
                let mut y = MpFloat::from_f64(v[k], prec);
                if k > 0 {
                    y = y.sub(&l[k - 1].mul(&y_prev));
                }
                acc = acc.add(&y.mul(&y).div(&d[k]));
                y_prev = y;
            }
            acc.to_f64()
        })
        .collect())
}

#[cfg(test)]
mod tests;
