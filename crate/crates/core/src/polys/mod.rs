//! Polynomials of the first and second kind, tail summability, the
//! deficiency probe and the limit `α = lim Q_j(0)/P_j(0)`.

mod exact;

pub use exact::{exact_table, ExactScalarTable};

use serde::Serialize;
use thiserror::Error;

use crate::exactq::{BigRational, QError};
use crate::numkernel::{CMat, NumError, C64};
use crate::operator::{nonneg_probe, BlockJacobi, NonnegVerdict, OpError};

/// Window length of the tail tests.
pub const WINDOW: usize = 10;
/// Relative tolerance on windowed tail increments.
pub const PROBE_TOL: f64 = 1e-12;
/// Partial sums beyond this count as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;
/// Default window spread accepted for `α`.
pub const ALPHA_ACCURACY: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error(transparent)]
    Operator(#[from] OpError),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Rational(#[from] QError),
    #[error("operator is not completely indeterminate (probe verdict {0:?})")]
    NotCompletelyIndeterminate(Verdict),
    #[error("operation needs a scalar (p = 1) operator")]
    NotScalar,
    #[error("exact evaluation needs rational coefficients and a rational real point")]
    ExactUnavailable,
    #[error("recurrence overflows at index {j}")]
    Overflow { j: usize },
    #[error("ratio window spread {width:e} exceeds the requested accuracy {accuracy:e}")]
    NotCauchy { width: f64, accuracy: f64 },
    #[error("limit estimate {0} is not negative")]
    AlphaNotNegative(f64),
    #[error("finite section of size {n} has eigenvalue {lambda_min:e}")]
    NotNonNegative { n: usize, lambda_min: f64 },
}

/// Step-by-step evaluation of `P_j(z)` and `Q_j(z)`.
///
/// Stored values may carry a common factor `2^-scale` (see [`Stream::rescale`]).
pub(crate) struct Stream<'a> {
    op: &'a BlockJacobi,
    z: C64,
    j: usize,
    p: [CMat; 2],
    q: [CMat; 2],
    b_prev: Option<CMat>,
    scale: i64,
}

impl<'a> Stream<'a> {
    pub(crate) fn new(op: &'a BlockJacobi, z: C64) -> Self {
        let n = op.p();
        Self {
            op,
            z,
            j: 0,
            p: [CMat::zeros(n, n), CMat::identity(n)],
            q: [CMat::zeros(n, n), CMat::zeros(n, n)],
            b_prev: None,
            scale: 0,
        }
    }

    pub(crate) fn index(&self) -> usize {
        self.j
    }

    /// `(P_j, Q_j)` at the current index, times `2^-scale`.
    pub(crate) fn current(&self) -> (&CMat, &CMat) {
        (&self.p[1], &self.q[1])
    }

    pub(crate) fn scale(&self) -> i64 {
        self.scale
    }

    /// Multiplies the stored values by `2^-e`.
    pub(crate) fn rescale(&mut self, e: i64) {
        for m in self.p.iter_mut().chain(self.q.iter_mut()) {
            for x in m.data_mut() {
                *x = C64::new(crate::exactq::ldexp(x.re, -e), crate::exactq::ldexp(x.im, -e));
            }
        }
        self.scale += e;
    }

    /// Moves to index `j + 1`.
    pub(crate) fn advance(&mut self) -> Result<(), PolyError> {
        let j = self.j;
        let bl = self.op.blocks(j)?;
        let n = self.op.p();
        let shifted = &CMat::identity(n).scale(self.z) - &bl.a;
        let step = |u: &CMat, um: &CMat, b_prev: Option<&CMat>| -> CMat {
            let mut r = &shifted * u;
            if let Some(bp) = b_prev {
                r = &r - &(&bp.adjoint() * um);
            }
            &bl.b_inv * &r
        };
        let p_next = step(&self.p[1], &self.p[0], self.b_prev.as_ref());
        let q_next = if j == 0 {
            bl.b_inv.scale_real(crate::exactq::ldexp(1.0, -self.scale))
        } else {
            step(&self.q[1], &self.q[0], self.b_prev.as_ref())
        };
        if !p_next.is_finite() || !q_next.is_finite() {
            return Err(PolyError::Overflow { j: j + 1 });
        }
        self.p = [std::mem::replace(&mut self.p[1], CMat::zeros(n, n)), p_next];
        self.q = [std::mem::replace(&mut self.q[1], CMat::zeros(n, n)), q_next];
        self.b_prev = Some(bl.b);
        self.j = j + 1;
        Ok(())
    }
}

/// `P_j(z)`, `Q_j(z)` for `j = 0..=N` with running tail sums.
#[derive(Debug, Clone)]
pub struct PolyTable {
    pub z: C64,
    pub p: Vec<CMat>,
    pub q: Vec<CMat>,
    /// `tail_p[j] = Σ_{k≤j} ‖P_k‖_F²`.
    pub tail_p: Vec<f64>,
    pub tail_q: Vec<f64>,
    pub exact: Option<ExactScalarTable>,
}

impl PolyTable {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Largest residual of `B_j U_{j+1} + A_j U_j + B_{j-1}* U_{j-1} = z U_j`
    /// over both families, `j = 0..N-1`, each relative to the largest of its
    /// terms (and at least 1).
    pub fn recurrence_residual(&self, op: &BlockJacobi) -> Result<f64, PolyError> {
        let n = op.p();
        let mut worst: f64 = 0.0;
        let mut b_prev: Option<CMat> = None;
        for j in 0..self.len().saturating_sub(1) {
            let bl = op.blocks(j)?;
            for (fam, is_q) in [(&self.p, false), (&self.q, true)] {
                let mut terms = vec![&bl.b * &fam[j + 1], &bl.a * &fam[j], fam[j].scale(-self.z)];
                if let Some(bp) = &b_prev {
                    terms.push(&bp.adjoint() * &fam[j - 1]);
                }
                if is_q && j == 0 {
                    // the second kind solves the inhomogeneous first row
                    terms.push(CMat::identity(n).scale_real(-1.0));
                }
                let scale = terms.iter().map(CMat::frob_norm).fold(1.0, f64::max);
                let r = terms[1..].iter().fold(terms[0].clone(), |acc, t| &acc + t);
                worst = worst.max(r.frob_norm() / scale);
            }
            b_prev = Some(bl.b);
        }
        Ok(worst)
    }
}

/// Runs the recurrence up to index `N`.
///
/// With `use_exact` the monic rational forms are evaluated as well; this needs
/// a scalar operator with rational coefficients and a real `z`, which is
/// converted exactly.
pub fn eval_polys(op: &BlockJacobi, z: C64, n: usize, use_exact: bool) -> Result<PolyTable, PolyError> {
    let exact = if use_exact {
        if z.im != 0.0 || !op.has_exact() {
            return Err(PolyError::ExactUnavailable);
        }
        let zq = BigRational::from_f64(z.re).ok_or(PolyError::ExactUnavailable)?;
        Some(exact_table(op, &zq, n)?)
    } else {
        None
    };
    op.prefetch(n)?;
    let mut s = Stream::new(op, z);
    let mut p = Vec::with_capacity(n + 1);
    let mut q = Vec::with_capacity(n + 1);
    let (mut tp, mut tq) = (Vec::with_capacity(n + 1), Vec::with_capacity(n + 1));
    let (mut sp, mut sq) = (0.0, 0.0);
    loop {
        let (pj, qj) = s.current();
        sp += pj.frob_norm().powi(2);
        sq += qj.frob_norm().powi(2);
        p.push(pj.clone());
        q.push(qj.clone());
        tp.push(sp);
        tq.push(sq);
        if s.index() == n {
            break;
        }
        s.advance()?;
    }
    Ok(PolyTable { z, p, q, tail_p: tp, tail_q: tq, exact })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    CompletelyIndeterminate,
    Determinate,
    Inconclusive,
}

/// One windowed increment of a tail sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailWindow {
    pub point: String,
    pub series: char,
    pub end: usize,
    pub increment: f64,
    pub partial_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyReport {
    pub verdict: Verdict,
    pub evidence: Vec<TailWindow>,
    pub n_used: usize,
}

struct TailTracker {
    point: &'static str,
    series: char,
    sum: f64,
    window_start_sum: f64,
    increments: Vec<f64>,
}

impl TailTracker {
    fn new(point: &'static str, series: char) -> Self {
        Self { point, series, sum: 0.0, window_start_sum: 0.0, increments: Vec::new() }
    }

    fn close_window(&mut self, end: usize, out: &mut Vec<TailWindow>) {
        let inc = self.sum - self.window_start_sum;
        self.increments.push(inc);
        self.window_start_sum = self.sum;
        out.push(TailWindow { point: self.point.into(), series: self.series, end, increment: inc, partial_sum: self.sum });
    }

    /// The last two windows are both small relative to the sum.
    fn settled(&self, tol: f64) -> bool {
        let k = self.increments.len();
        k >= 2 && self.increments[k - 2..].iter().all(|&i| i <= tol * self.sum.max(1.0))
    }

    /// Past the threshold with non-shrinking increments over the last three windows.
    fn diverging(&self) -> bool {
        let k = self.increments.len();
        self.sum > DIVERGENCE_THRESHOLD
            && k >= 3
            && self.increments[k - 3..].windows(2).all(|w| w[1] >= w[0] && w[0] > 0.0)
    }
}

/// Windowed tail test of `Σ‖P_j(z)‖²` and `Σ‖Q_j(z)‖²` at `z = -1` and `z = i`.
///
/// Reports `CompletelyIndeterminate` once every series has two consecutive
/// windows with increments at most `tol` relative to its partial sum,
/// `Determinate` once some series passes [`DIVERGENCE_THRESHOLD`] while
/// growing, and `Inconclusive` if neither happens by `N_max` or the
/// recurrence leaves the double range first.
pub fn deficiency_probe(op: &BlockJacobi, n_max: usize, tol: f64) -> Result<DeficiencyReport, PolyError> {
    assert!(n_max >= 2 * WINDOW, "probe needs at least two windows");
    let points: [(&'static str, C64); 2] = [("-1", C64::new(-1.0, 0.0)), ("i", C64::new(0.0, 1.0))];
    let mut streams: Vec<Stream> = points.iter().map(|(_, z)| Stream::new(op, *z)).collect();
    let mut trackers: Vec<TailTracker> = points
        .iter()
        .flat_map(|(name, _)| [TailTracker::new(name, 'P'), TailTracker::new(name, 'Q')])
        .collect();
    let mut evidence = Vec::new();
    let mut j = 0;
    loop {
        for (k, s) in streams.iter().enumerate() {
            let (pj, qj) = s.current();
            trackers[2 * k].sum += pj.frob_norm().powi(2);
            trackers[2 * k + 1].sum += qj.frob_norm().powi(2);
        }
        if (j + 1) % WINDOW == 0 {
            for t in trackers.iter_mut() {
                t.close_window(j, &mut evidence);
            }
            if trackers.iter().all(|t| t.settled(tol)) {
                return Ok(DeficiencyReport { verdict: Verdict::CompletelyIndeterminate, evidence, n_used: j });
            }
            if trackers.iter().any(|t| t.diverging()) {
                return Ok(DeficiencyReport { verdict: Verdict::Determinate, evidence, n_used: j });
            }
        }
        if j == n_max {
            break;
        }
        let mut overflow = false;
        for s in streams.iter_mut() {
            match s.advance() {
                Ok(()) => {}
                Err(PolyError::Overflow { .. }) | Err(PolyError::Operator(OpError::CoefficientOverflow { .. })) => {
                    overflow = true
                }
                Err(e) => return Err(e),
            }
        }
        if overflow {
            break;
        }
        j += 1;
    }
    let verdict = if trackers.iter().any(|t| t.sum > DIVERGENCE_THRESHOLD || !t.sum.is_finite()) {
        Verdict::Determinate
    } else {
        Verdict::Inconclusive
    };
    Ok(DeficiencyReport { verdict, evidence, n_used: j })
}

/// Fails unless the probe reports complete indeterminacy.
pub fn require_indeterminate(op: &BlockJacobi, n_max: usize) -> Result<DeficiencyReport, PolyError> {
    let r = deficiency_probe(op, n_max.max(2 * WINDOW), PROBE_TOL)?;
    match r.verdict {
        Verdict::CompletelyIndeterminate => Ok(r),
        v => Err(PolyError::NotCompletelyIndeterminate(v)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub value: f64,
    /// `Q_j(0)/P_j(0)` for `j = 1..=N`.
    pub ratios: Vec<f64>,
    pub cauchy_width: f64,
    pub window: usize,
    pub n_used: usize,
    /// Exact ratio at depth `N` when the coefficients are rational.
    pub exact: Option<BigRational>,
}

/// `Q_N(0)/P_N(0)` exactly, i.e. `σ_N(0)/π_N(0)` in monic form.
pub fn exact_alpha(op: &BlockJacobi, n: usize) -> Option<Result<BigRational, PolyError>> {
    if !op.has_exact() {
        return None;
    }
    Some(exact_table(op, &BigRational::zero(), n).and_then(|t| t.ratio(n)))
}

/// Estimate of `α` from the ratios at `z = 0` up to depth `N`, with the
/// spread over the final `window` indices as certificate.
pub fn alpha_estimate(op: &BlockJacobi, n: usize, window: usize, accuracy: f64) -> Result<AlphaEstimate, PolyError> {
    if op.p() != 1 {
        return Err(PolyError::NotScalar);
    }
    assert!(window >= 1 && n > window, "window must fit below N");
    require_indeterminate(op, n.max(60))?;
    if let NonnegVerdict::NegativeAt { n, lambda_min } = nonneg_probe(op, n, crate::numkernel::DEFAULT_ZERO_TOL)? {
        return Err(PolyError::NotNonNegative { n, lambda_min });
    }
    let (ratios, exact, width) = if op.has_exact() {
        let t = exact_table(op, &BigRational::zero(), n)?;
        let exact: Vec<BigRational> = (1..=n).map(|j| t.ratio(j)).collect::<Result<_, _>>()?;
        let last = exact.last().expect("n >= 1").clone();
        // exact differences avoid cancellation in the spread itself
        let width = exact[exact.len() - 1 - window..]
            .iter()
            .map(|r| (&last - r).abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        (exact.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect::<Vec<f64>>(), Some(last), width)
    } else {
        let t = eval_polys(op, C64::new(0.0, 0.0), n, false)?;
        let f: Vec<f64> = (1..=n).map(|j| t.q[j][(0, 0)].re / t.p[j][(0, 0)].re).collect();
        let last = *f.last().expect("n >= 1");
        let width = f[f.len() - 1 - window..].iter().map(|r| (r - last).abs()).fold(0.0, f64::max);
        (f, None, width)
    };
    let value = *ratios.last().expect("n >= 1");
    if !value.is_finite() || value >= 0.0 {
        return Err(PolyError::AlphaNotNegative(value));
    }
    if !(width <= accuracy) {
        return Err(PolyError::NotCauchy { width, accuracy });
    }
    Ok(AlphaEstimate { value, ratios, cauchy_width: width, window, n_used: n, exact })
}

/// `true` iff every `P_j` (and `Q_j`, `j ≥ 1`) keeps one sign across the grid.
pub fn sign_constancy_check(op: &BlockJacobi, x_grid: &[f64], n: usize) -> Result<bool, PolyError> {
    if op.p() != 1 {
        return Err(PolyError::NotScalar);
    }
    let mut signs: Vec<Vec<(i32, i32)>> = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let row = if op.has_exact() {
            let xq = BigRational::from_f64(x).ok_or(PolyError::ExactUnavailable)?;
            let t = exact_table(op, &xq, n)?;
            (0..=n).map(|j| (t.pi[j].signum(), t.sigma[j].signum())).collect()
        } else {
            let t = eval_polys(op, C64::new(x, 0.0), n, false)?;
            (0..=n).map(|j| (sgn(t.p[j][(0, 0)].re), sgn(t.q[j][(0, 0)].re))).collect()
        };
        signs.push(row);
    }
    let Some(first) = signs.first() else { return Ok(true) };
    for row in &signs[1..] {
        for j in 0..=n {
            if row[j].0 != first[j].0 || (j >= 1 && row[j].1 != first[j].1) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn sgn(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}
