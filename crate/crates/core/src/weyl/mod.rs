//! The Weyl function `M(z) = (z S_Q(z) - I)(z S_P(z))⁻¹` with
//! `S_P = Σ P_j(0)* P_j(z)`, `S_Q = Σ Q_j(0)* P_j(z)`, its limit at `-∞`, and
//! the resolvent evidence at `0`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactq::ldexp;
use crate::numkernel::{hermitian_eigen, inertia, invert, psd_order_check, CMat, NumError, C64, DEFAULT_TOL};
use crate::polys::{alpha_estimate, require_indeterminate, AlphaEstimate, PolyError, Stream, ALPHA_ACCURACY, WINDOW};
use crate::operator::BlockJacobi;

/// Smallest accepted reciprocal condition number of a matrix being inverted.
pub const MIN_RECIP_COND: f64 = 1e-12;
/// Depth used for `α` in the scalar limit.
pub const ALPHA_DEPTH: usize = 60;
/// Running values are renormalized by `2^RESCALE_BITS` once they exceed it.
const RESCALE_BITS: i64 = 600;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeylError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error("series did not settle within N_max = {n_max}")]
    SeriesNotConverged { n_max: usize },
    #[error("matrix to invert is near singular (reciprocal condition {recip_cond:e})")]
    NearSingularDenominator { recip_cond: f64 },
    #[error("point {0} is outside the admissible region")]
    BadPoint(C64),
    #[error("grid values do not settle: {0}")]
    LimitNotSettled(String),
}

/// One evaluation of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylSample {
    pub z: C64,
    pub m: CMat,
    pub n_used: usize,
    /// `‖M_{N_used} - M_{N_used/2}‖_F` for the truncated series.
    pub truncation_gap: f64,
    pub hermitian_defect: f64,
}

fn admissible(z: C64) -> bool {
    z.is_finite() && (z.im != 0.0 || z.re < 0.0)
}

fn scale_pow2(m: &mut CMat, e: i64) {
    for x in m.data_mut() {
        *x = C64::new(ldexp(x.re, -e), ldexp(x.im, -e));
    }
}

/// `X⁻¹` with the reciprocal condition guard.
pub(crate) fn guarded_inverse(x: &CMat) -> Result<CMat, WeylError> {
    let inv = invert(x, DEFAULT_TOL * 1e-2).map_err(|_| WeylError::NearSingularDenominator { recip_cond: 0.0 })?;
    let recip_cond = 1.0 / (x.frob_norm() * inv.frob_norm()) * x.rows() as f64;
    if !(recip_cond >= MIN_RECIP_COND) {
        return Err(WeylError::NearSingularDenominator { recip_cond });
    }
    Ok(inv)
}

/// `‖X‖₂` of a square matrix.
pub fn spectral_norm(x: &CMat) -> Result<f64, NumError> {
    let g = (&x.adjoint() * x).hermitian_part();
    let e = hermitian_eigen(&g, DEFAULT_TOL)?;
    Ok(e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Evaluates `M(z)` after confirming complete indeterminacy.
pub fn weyl_eval(op: &BlockJacobi, z: C64, tol: f64, n_max: usize) -> Result<WeylSample, WeylError> {
    require_indeterminate(op, n_max)?;
    weyl_series(op, z, tol, n_max)
}

/// Series evaluation without the indeterminacy check.
///
/// Both sums run over a common index. At the first window boundary `K` where
/// the windowed increments of `S_P` and `S_Q` are at most `tol` relative to
/// the sums, `M_K` is recorded; the evaluation continues to `2K` (capped at
/// `N_max`) and reports the change as the truncation gap.
pub fn weyl_series(op: &BlockJacobi, z: C64, tol: f64, n_max: usize) -> Result<WeylSample, WeylError> {
    if !admissible(z) {
        return Err(WeylError::BadPoint(z));
    }
    let p = op.p();
    let mut at0 = Stream::new(op, C64::new(0.0, 0.0));
    let mut atz = Stream::new(op, z);
    let (mut sp, mut sq) = (CMat::zeros(p, p), CMat::zeros(p, p));
    let (mut wp, mut wq) = (CMat::zeros(p, p), CMat::zeros(p, p));
    let mut settled: Option<(usize, CMat)> = None;
    let mut j = 0usize;
    loop {
        let (p0, q0) = at0.current();
        let (pz, _) = atz.current();
        let tp = &p0.adjoint() * pz;
        let tq = &q0.adjoint() * pz;
        sp = &sp + &tp;
        sq = &sq + &tq;
        wp = &wp + &tp;
        wq = &wq + &tq;
        let terms = j + 1;
        if terms % WINDOW == 0 {
            if settled.is_none() && wp.frob_norm() <= tol * sp.frob_norm() && wq.frob_norm() <= tol * sq.frob_norm() {
                settled = Some((terms, assemble(z, &sp, &sq, atz.scale())?));
            }
            wp = CMat::zeros(p, p);
            wq = CMat::zeros(p, p);
        }
        let done = match &settled {
            Some((k, _)) => terms >= 2 * k || j >= n_max,
            None if j >= n_max => return Err(WeylError::SeriesNotConverged { n_max }),
            None => false,
        };
        if done {
            let (_, m_k) = settled.expect("settled");
            let m = assemble(z, &sp, &sq, atz.scale())?;
            let gap = (&m - &m_k).frob_norm();
            let hermitian_defect = if z.im == 0.0 { m.hermitian_defect() } else { 0.0 };
            return Ok(WeylSample { z, m, n_used: terms, truncation_gap: gap, hermitian_defect });
        }
        at0.advance()?;
        atz.advance()?;
        if atz.current().0.max_abs() > ldexp(1.0, RESCALE_BITS) {
            atz.rescale(RESCALE_BITS);
            for m in [&mut sp, &mut sq, &mut wp, &mut wq] {
                scale_pow2(m, RESCALE_BITS);
            }
        }
        j += 1;
    }
}

/// `M = (z Ŝ_Q - 2^-scale I)(z Ŝ_P)⁻¹` for sums carrying the factor `2^-scale`.
fn assemble(z: C64, sp: &CMat, sq: &CMat, scale: i64) -> Result<CMat, WeylError> {
    let p = sp.rows();
    let den = sp.scale(z);
    let num = &sq.scale(z) - &CMat::identity(p).scale_real(ldexp(1.0, -scale));
    Ok(&num * &guarded_inverse(&den)?)
}

/// Evaluates a list of points concurrently, preserving order.
pub fn weyl_grid(op: &BlockJacobi, zs: &[C64], tol: f64, n_max: usize) -> Result<Vec<WeylSample>, WeylError> {
    op.prefetch(WINDOW * 8).map_err(PolyError::from)?;
    zs.par_iter().map(|&z| weyl_series(op, z, tol, n_max)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitMode {
    ScalarProven,
    BlockHeuristic,
}

/// `‖(M(x) + γ)⁻¹‖₂` at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventNorm {
    pub x: f64,
    pub gamma: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylLimits {
    pub m_minus_inf: CMat,
    pub mode: LimitMode,
    pub alpha: Option<AlphaEstimate>,
    pub samples: Vec<WeylSample>,
    /// `‖M(x_k) - M(-∞)‖_F` along the grid.
    pub distances: Vec<f64>,
    /// `‖M(x_{k+1}) - M(x_k)‖_F`.
    pub gaps: Vec<f64>,
    /// Spread of the last two extrapolations (block mode) or the last gap.
    pub cauchy_spread: f64,
    pub flags: Vec<String>,
    pub zero_resolvent_norms: Vec<ResolventNorm>,
}

impl WeylLimits {
    /// Scalar limit known only through `α`, without grid samples.
    pub fn from_alpha(alpha: AlphaEstimate) -> Self {
        Self {
            m_minus_inf: CMat::scalar(alpha.value),
            mode: LimitMode::ScalarProven,
            alpha: Some(alpha),
            samples: Vec::new(),
            distances: Vec::new(),
            gaps: Vec::new(),
            cauchy_spread: f64::NAN,
            flags: Vec::new(),
            zero_resolvent_norms: Vec::new(),
        }
    }

    /// Scalar `M(-∞)` when `p = 1`.
    pub fn scalar(&self) -> Option<f64> {
        (self.m_minus_inf.rows() == 1).then(|| self.m_minus_inf[(0, 0)].re)
    }
}

/// `M(-∞)` from a grid `x_k → -∞` (strictly decreasing negative values).
///
/// For `p = 1` the limit is `α` from [`alpha_estimate`] and the grid only
/// has to approach it monotonically. For `p > 1` the limit is an entrywise
/// Aitken extrapolation of the last three samples, accepted when two
/// consecutive extrapolations agree within `tol` relative to their size.
pub fn weyl_limit_minus_inf(op: &BlockJacobi, grid: &[f64], tol: f64, n_max: usize) -> Result<WeylLimits, WeylError> {
    if grid.is_empty() || grid.iter().any(|&x| !(x < 0.0)) || grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(WeylError::LimitNotSettled("grid must be negative and strictly decreasing".into()));
    }
    require_indeterminate(op, n_max)?;
    let zs: Vec<C64> = grid.iter().map(|&x| C64::new(x, 0.0)).collect();
    let samples = weyl_grid(op, &zs, DEFAULT_TOL, n_max)?;
    let gaps: Vec<f64> = samples.windows(2).map(|w| (&w[1].m - &w[0].m).frob_norm()).collect();
    let mut flags = Vec::new();
    if op.p() == 1 {
        let alpha = alpha_estimate(op, ALPHA_DEPTH, WINDOW, ALPHA_ACCURACY)?;
        let limit = CMat::scalar(alpha.value);
        let distances: Vec<f64> = samples.iter().map(|s| (&s.m - &limit).frob_norm()).collect();
        if let Some(k) = distances.windows(2).position(|w| w[1] > w[0]) {
            return Err(WeylError::LimitNotSettled(format!(
                "|M(x) - alpha| grows from {:e} to {:e} between x = {} and x = {}",
                distances[k],
                distances[k + 1],
                grid[k],
                grid[k + 1]
            )));
        }
        let n = distances.len();
        if n >= 2 && distances[n - 1] > 10.0 * distances[n - 2] {
            flags.push("last distance to alpha exceeds ten times the previous one".into());
        }
        let cauchy_spread = gaps.last().copied().unwrap_or(f64::NAN);
        return Ok(WeylLimits {
            m_minus_inf: limit,
            mode: LimitMode::ScalarProven,
            alpha: Some(alpha),
            samples,
            distances,
            gaps,
            cauchy_spread,
            flags,
            zero_resolvent_norms: Vec::new(),
        });
    }
    if samples.len() < 4 {
        return Err(WeylError::LimitNotSettled("block extrapolation needs at least four grid points".into()));
    }
    let k = samples.len();
    let last = aitken(&samples[k - 3].m, &samples[k - 2].m, &samples[k - 1].m);
    let prev = aitken(&samples[k - 4].m, &samples[k - 3].m, &samples[k - 2].m);
    let cauchy_spread = (&last - &prev).frob_norm();
    if cauchy_spread > tol * last.frob_norm().max(1.0) {
        return Err(WeylError::LimitNotSettled(format!("extrapolations differ by {cauchy_spread:e}")));
    }
    let limit = last.hermitian_part();
    flags.push("block limit is a numerical extrapolation".into());
    let distances = samples.iter().map(|s| (&s.m - &limit).frob_norm()).collect();
    Ok(WeylLimits {
        m_minus_inf: limit,
        mode: LimitMode::BlockHeuristic,
        alpha: None,
        samples,
        distances,
        gaps,
        cauchy_spread,
        flags,
        zero_resolvent_norms: Vec::new(),
    })
}

/// Entrywise Aitken Δ² on three consecutive matrices; entries without a
/// usable second difference keep the last value.
fn aitken(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    let mut out = c.clone();
    for (k, o) in out.data_mut().iter_mut().enumerate() {
        let (x0, x1, x2) = (a.data()[k], b.data()[k], c.data()[k]);
        let d2 = x2 - x1 * 2.0 + x0;
        if d2.norm() > 1e-14 * x2.norm().max(1e-300) {
            let d1 = x2 - x1;
            *o = x2 - d1 * d1 / d2;
        }
    }
    out
}

/// `‖(M(x) + γ)⁻¹‖₂` for every `(γ, x)` pair.
pub fn weyl_zero_resolvent(op: &BlockJacobi, gammas: &[f64], x_grid: &[f64], n_max: usize) -> Result<Vec<ResolventNorm>, WeylError> {
    if x_grid.is_empty() || gammas.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(&g) = gammas.iter().find(|&&g| !(g > 0.0)) {
        return Err(WeylError::BadPoint(C64::new(g, 0.0)));
    }
    require_indeterminate(op, n_max)?;
    let zs: Vec<C64> = x_grid.iter().map(|&x| C64::new(x, 0.0)).collect();
    let samples = weyl_grid(op, &zs, DEFAULT_TOL, n_max)?;
    let p = op.p();
    let mut out = Vec::with_capacity(gammas.len() * x_grid.len());
    for &gamma in gammas {
        for s in &samples {
            let shifted = &s.m.hermitian_part() + &CMat::identity(p).scale_real(gamma);
            let inv = guarded_inverse(&shifted)?;
            out.push(ResolventNorm { x: s.z.re, gamma, norm: spectral_norm(&inv)? });
        }
    }
    Ok(out)
}

/// `Im M(z) = (M - M*)/2i` is positive semidefinite (no eigenvalue below
/// `-1e-9`) at every point, all of which need `Im z > 0`.
pub fn herglotz_check(op: &BlockJacobi, z_list: &[C64], n_max: usize) -> Result<bool, WeylError> {
    if let Some(&z) = z_list.iter().find(|z| !(z.im > 0.0)) {
        return Err(WeylError::BadPoint(z));
    }
    require_indeterminate(op, n_max)?;
    for s in weyl_grid(op, z_list, DEFAULT_TOL, n_max)? {
        if inertia(&imaginary_part(&s.m), 1e-9)?.n_neg > 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(M - M*)/2i`.
pub fn imaginary_part(m: &CMat) -> CMat {
    (m - &m.adjoint()).scale(C64::new(0.0, -0.5))
}

/// `M(x₂) - M(x₁)` is PSD at `tol` for all sampled `x₁ < x₂`.
pub fn matrix_monotone(samples: &[WeylSample], tol: f64) -> Result<bool, WeylError> {
    let mut s: Vec<&WeylSample> = samples.iter().collect();
    s.sort_by(|a, b| a.z.re.total_cmp(&b.z.re));
    for w in s.windows(2) {
        if !psd_order_check(&w[0].m.hermitian_part(), &w[1].m.hermitian_part(), tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests;
