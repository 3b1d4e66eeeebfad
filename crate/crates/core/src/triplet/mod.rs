//! Boundary maps `Γ₀`, `Γ₁` on `dom(T_max)`, the Green identity, and the
//! classification of self-adjoint extensions `ker(DΓ₁ - CΓ₀)`.
//!
//! Elements of `dom(T_max)` are stored as `u = f + P(0)c + Q(0)d` with `f`
//! finitely supported. Since `J P(0) = 0` and `J Q(0) = e₀ ⊗ I`, one has
//! `T_max u = Jf + e₀ ⊗ d`, and every pairing below is a finite sum.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exactq::BigRational;
use crate::numkernel::{hermitian_eigen, inertia, CMat, NumError, C64, DEFAULT_TOL, DEFAULT_ZERO_TOL};
use crate::operator::{apply, BlockJacobi, CoeffVector, OpError};
use crate::polys::{eval_polys, exact_table, require_indeterminate, PolyError, PolyTable};
use crate::weyl::{LimitMode, WeylLimits};

/// Tolerance of the structural identities.
pub const STRUCT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TripletError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Operator(#[from] OpError),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("scalar parameters need p = 1")]
    NotScalar,
    #[error("bad extension parameter: {0}")]
    BadParameter(String),
    #[error("(C, D) violates CD* = DC* or invertibility of CC* + DD*")]
    NotSelfAdjoint,
    #[error("finite part of a boundary map is {value:e}, above tolerance {tol:e}")]
    BoundaryDefect { value: f64, tol: f64 },
}

/// `u = f + P(0)c + Q(0)d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainVector {
    pub f: CoeffVector,
    pub c: Vec<C64>,
    pub d: Vec<C64>,
}

impl DomainVector {
    pub fn new(f: CoeffVector, c: Vec<C64>, d: Vec<C64>) -> Self {
        assert!(c.len() == f.p() && d.len() == f.p(), "tail coefficients must have length p");
        Self { f, c, d }
    }

    pub fn finite(f: CoeffVector) -> Self {
        let p = f.p();
        Self::new(f, vec![C64::new(0.0, 0.0); p], vec![C64::new(0.0, 0.0); p])
    }

    pub fn p(&self) -> usize {
        self.f.p()
    }
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| y.conj() * x).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Finitely supported vector with entries `g_j / w_j`, `g_j` uniform in the
/// unit square, `w_j = 1 + ‖A_j‖ + ‖B_j‖ + ‖B_{j-1}‖`; the row scaling keeps
/// every entry of `Jf` of order one.
pub fn random_finite_vector<R: Rng>(op: &BlockJacobi, support_max: usize, rng: &mut R) -> Result<CoeffVector, OpError> {
    let p = op.p();
    let mut blocks = Vec::with_capacity(support_max + 1);
    let mut b_prev = 0.0;
    for j in 0..=support_max {
        let bl = op.blocks(j)?;
        let w = 1.0 + bl.a.frob_norm() + bl.b.frob_norm() + b_prev;
        b_prev = bl.b.frob_norm();
        blocks.push((0..p).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / w).collect());
    }
    Ok(CoeffVector::from_blocks(p, blocks))
}

/// Random vector in `ℂ^p` with entries in the unit square.
pub fn random_tail<R: Rng>(p: usize, rng: &mut R) -> Vec<C64> {
    (0..p).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// `(Σ_j P_j(0)*(Jf)_j, Σ_j Q_j(0)*(Jf)_j - f₀)` for finitely supported `f`,
/// with `Σ_j |P_j(0)| |(Jf)_j|`-type magnitudes for scaling the roundoff.
///
/// Both sums vanish for every operator; no indeterminacy is needed here.
pub fn boundary_sums(op: &BlockJacobi, f: &CoeffVector) -> Result<BoundarySums, TripletError> {
    let jf = apply(op, f)?;
    let top = jf.support_max();
    let t = eval_polys(op, C64::new(0.0, 0.0), top, false)?;
    Ok(sums_with(&t, f, &jf))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySums {
    pub gamma0_part: Vec<C64>,
    pub gamma1_part: Vec<C64>,
    /// Sum of the moduli of the terms of each sum.
    pub gamma0_scale: f64,
    pub gamma1_scale: f64,
}

fn sums_with(t: &PolyTable, f: &CoeffVector, jf: &CoeffVector) -> BoundarySums {
    let p = f.p();
    let mut s0 = vec![C64::new(0.0, 0.0); p];
    let mut s1 = vec![C64::new(0.0, 0.0); p];
    let (mut m0, mut m1) = (0.0, 0.0);
    for (j, blk) in jf.blocks().iter().enumerate() {
        let a = t.p[j].adjoint().mul_vec(blk);
        let b = t.q[j].adjoint().mul_vec(blk);
        m0 += t.p[j].frob_norm() * norm(blk);
        m1 += t.q[j].frob_norm() * norm(blk);
        for k in 0..p {
            s0[k] += a[k];
            s1[k] += b[k];
        }
    }
    let f0 = f.block(0).expect("block 0");
    for k in 0..p {
        s1[k] -= f0[k];
    }
    m1 += norm(f0);
    BoundarySums { gamma0_part: s0, gamma1_part: s1, gamma0_scale: m0, gamma1_scale: m1 }
}

/// Exact boundary sums for a scalar rational operator on `f_j = g_j/√n_j`,
/// `n_j = b²_0 ⋯ b²_{j-1}`.
///
/// Then `(Jf)_j = (Lg)_j/√n_j` with `(Lg)_j = g_{j+1} + a_j g_j + b²_{j-1} g_{j-1}`,
/// so `P_j(0)(Jf)_j = π_j (Lg)_j / n_j` and both sums are rational.
pub fn boundary_sums_exact(op: &BlockJacobi, g: &[BigRational]) -> Result<(BigRational, BigRational), TripletError> {
    if op.p() != 1 {
        return Err(TripletError::NotScalar);
    }
    assert!(!g.is_empty());
    let top = g.len();
    let t = exact_table(op, &BigRational::zero(), top + 1)?;
    let at = |k: usize| g.get(k).cloned().unwrap_or_else(BigRational::zero);
    let mut s0 = BigRational::zero();
    let mut s1 = BigRational::zero();
    for j in 0..=top {
        let mut lg = at(j + 1) + &t.a[j] * &at(j);
        if j > 0 {
            lg = lg + &t.b2[j - 1] * &at(j - 1);
        }
        let w = lg.checked_div(&t.norm[j]).map_err(PolyError::from)?;
        s0 = s0 + &t.pi[j] * &w;
        s1 = s1 + &t.sigma[j] * &w;
    }
    Ok((s0, s1 - &g[0]))
}

/// The boundary triplet of a completely indeterminate operator.
#[derive(Debug, Clone)]
pub struct Triplet {
    op: BlockJacobi,
}

impl Triplet {
    /// Confirms complete indeterminacy with the probe up to `n_max`.
    pub fn new(op: &BlockJacobi, n_max: usize) -> Result<Self, TripletError> {
        require_indeterminate(op, n_max)?;
        Ok(Self { op: op.clone() })
    }

    pub fn operator(&self) -> &BlockJacobi {
        &self.op
    }

    fn check(&self, u: &DomainVector) -> Result<(), TripletError> {
        if u.p() != self.op.p() {
            return Err(TripletError::DimensionMismatch { expected: self.op.p(), got: u.p() });
        }
        Ok(())
    }

    /// `T_max u = Jf + e₀ ⊗ d`.
    pub fn t_max(&self, u: &DomainVector) -> Result<CoeffVector, TripletError> {
        self.check(u)?;
        let mut out = apply(&self.op, &u.f)?;
        for (x, y) in out.block_mut(0).iter_mut().zip(&u.d) {
            *x += y;
        }
        Ok(out)
    }

    /// `Γ₀u = d + Σ P_j(0)*(Jf)_j`; the sum must be below `tol` relative to
    /// the size of its terms.
    pub fn gamma0(&self, u: &DomainVector, tol: f64) -> Result<Vec<C64>, TripletError> {
        self.check(u)?;
        let s = boundary_sums(&self.op, &u.f)?;
        defect(&s.gamma0_part, s.gamma0_scale, tol)?;
        Ok(u.d.iter().zip(&s.gamma0_part).map(|(a, b)| a + b).collect())
    }

    /// `Γ₁u = -c + [Σ Q_j(0)*(Jf)_j - f₀]` with the same self-test on the bracket.
    pub fn gamma1(&self, u: &DomainVector, tol: f64) -> Result<Vec<C64>, TripletError> {
        self.check(u)?;
        let s = boundary_sums(&self.op, &u.f)?;
        defect(&s.gamma1_part, s.gamma1_scale, tol)?;
        Ok(u.c.iter().zip(&s.gamma1_part).map(|(a, b)| b - a).collect())
    }

    /// Components `u_j` for `j = 0..=top`.
    fn components(&self, u: &DomainVector, t: &PolyTable, top: usize) -> Vec<Vec<C64>> {
        (0..=top)
            .map(|j| {
                let pc = t.p[j].mul_vec(&u.c);
                let qd = t.q[j].mul_vec(&u.d);
                let f = u.f.block(j);
                (0..u.p()).map(|k| pc[k] + qd[k] + f.map_or(C64::new(0.0, 0.0), |b| b[k])).collect()
            })
            .collect()
    }

    /// `|(T_max u, v) - (u, T_max v) - [(Γ₁u, Γ₀v) - (Γ₀u, Γ₁v)]|`.
    pub fn green_residual(&self, u: &DomainVector, v: &DomainVector) -> Result<f64, TripletError> {
        let tu = self.t_max(u)?;
        let tv = self.t_max(v)?;
        let top = tu.support_max().max(tv.support_max());
        let t = eval_polys(&self.op, C64::new(0.0, 0.0), top, false)?;
        let uc = self.components(u, &t, top);
        let vc = self.components(v, &t, top);
        let mut lhs = C64::new(0.0, 0.0);
        for (j, b) in tu.blocks().iter().enumerate() {
            lhs += inner(b, &vc[j]);
        }
        for (j, b) in tv.blocks().iter().enumerate() {
            lhs -= inner(&uc[j], b);
        }
        let su = sums_with(&t, &u.f, &apply(&self.op, &u.f)?);
        let sv = sums_with(&t, &v.f, &apply(&self.op, &v.f)?);
        let g0 = |x: &DomainVector, s: &BoundarySums| -> Vec<C64> { x.d.iter().zip(&s.gamma0_part).map(|(a, b)| a + b).collect() };
        let g1 = |x: &DomainVector, s: &BoundarySums| -> Vec<C64> { x.c.iter().zip(&s.gamma1_part).map(|(a, b)| b - a).collect() };
        let rhs = inner(&g1(u, &su), &g0(v, &sv)) - inner(&g0(u, &su), &g1(v, &sv));
        Ok((lhs - rhs).norm())
    }
}

fn defect(part: &[C64], scale: f64, tol: f64) -> Result<(), TripletError> {
    let value = norm(part);
    let allowed = tol * scale.max(1.0);
    if value > allowed {
        return Err(TripletError::BoundaryDefect { value, tol: allowed });
    }
    Ok(())
}

/// `Γ₀u` after confirming complete indeterminacy.
pub fn gamma0(op: &BlockJacobi, u: &DomainVector, tol: f64) -> Result<Vec<C64>, TripletError> {
    Triplet::new(op, 200)?.gamma0(u, tol)
}

/// `Γ₁u` after confirming complete indeterminacy.
pub fn gamma1(op: &BlockJacobi, u: &DomainVector, tol: f64) -> Result<Vec<C64>, TripletError> {
    Triplet::new(op, 200)?.gamma1(u, tol)
}

/// Green identity residual after confirming complete indeterminacy.
pub fn green_residual(op: &BlockJacobi, u: &DomainVector, v: &DomainVector) -> Result<f64, TripletError> {
    Triplet::new(op, 200)?.green_residual(u, v)
}

/// `‖CD* - DC*‖_F ≤ tol` and `λ_min(CC* + DD*) > tol`.
pub fn selfadjoint_check(c: &CMat, d: &CMat, tol: f64) -> Result<bool, TripletError> {
    if !c.is_square() || (c.rows(), c.cols()) != (d.rows(), d.cols()) {
        return Err(TripletError::DimensionMismatch { expected: c.rows(), got: d.rows() });
    }
    let sym = &(c * &d.adjoint()) - &(d * &c.adjoint());
    let gram = (&(c * &c.adjoint()) + &(d * &d.adjoint())).hermitian_part();
    let lmin = hermitian_eigen(&gram, DEFAULT_TOL)?.values[0];
    Ok(sym.frob_norm() <= tol && lmin > tol)
}

/// A self-adjoint extension `ker(DΓ₁ - CΓ₀)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionSpec {
    Pair { c: CMat, d: CMat },
    /// `Γ₁u = hΓ₀u`; `h = -∞` means `Γ₀u = 0`.
    ScalarH(f64),
    Friedrichs,
    Krein,
}

impl ExtensionSpec {
    /// Short text form for reports.
    pub fn describe(&self) -> String {
        match self {
            Self::Pair { c, d } if c.rows() == 1 => {
                format!("pair(C={}, D={})", crate::cli::fmt_g17(c[(0, 0)].re), crate::cli::fmt_g17(d[(0, 0)].re))
            }
            Self::Pair { c, .. } => format!("pair({0}x{0})", c.rows()),
            Self::ScalarH(h) => format!("h={}", crate::cli::fmt_g17(*h)),
            Self::Friedrichs => "friedrichs".into(),
            Self::Krein => "krein".into(),
        }
    }

    /// The matrix pair `(C, D)`, using `limits` for the Friedrichs condition.
    pub fn pair(&self, p: usize, limits: Option<&WeylLimits>) -> Result<(CMat, CMat), TripletError> {
        match self {
            Self::Pair { c, d } => {
                if c.rows() != p || !c.is_square() || (d.rows(), d.cols()) != (p, p) {
                    return Err(TripletError::DimensionMismatch { expected: p, got: c.rows() });
                }
                Ok((c.clone(), d.clone()))
            }
            Self::ScalarH(h) => {
                if p != 1 {
                    return Err(TripletError::NotScalar);
                }
                match *h {
                    h if h == f64::NEG_INFINITY => Ok((CMat::scalar(1.0), CMat::scalar(0.0))),
                    h if h.is_finite() => Ok((CMat::scalar(h), CMat::scalar(1.0))),
                    h => Err(TripletError::BadParameter(format!("h = {h}"))),
                }
            }
            Self::Friedrichs => {
                let l = limits.ok_or_else(|| TripletError::BadParameter("Friedrichs needs M(-inf)".into()))?;
                Ok((l.m_minus_inf.clone(), CMat::identity(p)))
            }
            Self::Krein => Ok((CMat::identity(p), CMat::zeros(p, p))),
        }
    }

    /// Scalar `h` for `p = 1` pairs with `D ≠ 0` and for `ScalarH`.
    pub fn scalar_h(&self) -> Option<f64> {
        match self {
            Self::ScalarH(h) => Some(*h),
            Self::Pair { c, d } if c.rows() == 1 => {
                let (c, d) = (c[(0, 0)], d[(0, 0)]);
                match d.norm() == 0.0 {
                    true => Some(f64::NEG_INFINITY),
                    false => Some((c / d).re),
                }
            }
            _ => None,
        }
    }
}

/// A count or verdict together with caveats about how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Qualified<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

fn limit_warnings(limits: &WeylLimits) -> Vec<String> {
    match limits.mode {
        LimitMode::BlockHeuristic => vec!["BlockHeuristic: M(-inf) is an extrapolated estimate".into()],
        LimitMode::ScalarProven => Vec::new(),
    }
}

/// `CD* - D M(-∞) D*`.
pub fn kappa_form(c: &CMat, d: &CMat, m_inf: &CMat) -> CMat {
    (&(c * &d.adjoint()) - &(&(d * m_inf) * &d.adjoint())).hermitian_part()
}

/// `κ₊(CD* - D M(-∞) D*)`, the number of negative eigenvalues of the extension.
pub fn kappa_minus(spec: &ExtensionSpec, limits: &WeylLimits, tol: f64) -> Result<Qualified<usize>, TripletError> {
    let p = limits.m_minus_inf.rows();
    let mut warnings = limit_warnings(limits);
    let value = match spec {
        ExtensionSpec::Friedrichs | ExtensionSpec::Krein => 0,
        ExtensionSpec::ScalarH(h) => {
            let (c, d) = spec.pair(p, Some(limits))?;
            match *h == f64::NEG_INFINITY {
                true => 0,
                false => inertia(&kappa_form(&c, &d, &limits.m_minus_inf), tol)?.n_pos,
            }
        }
        ExtensionSpec::Pair { c, d } => {
            spec.pair(p, Some(limits))?;
            if !selfadjoint_check(c, d, STRUCT_TOL)? {
                return Err(TripletError::NotSelfAdjoint);
            }
            if hermitian_eigen(&(d * &d.adjoint()).hermitian_part(), DEFAULT_TOL)?.values[0] <= tol {
                warnings.push("D is singular; the form is evaluated as a matrix".into());
            }
            inertia(&kappa_form(c, d, &limits.m_minus_inf), tol)?.n_pos
        }
    };
    Ok(Qualified { value, warnings })
}

/// Whether the extension is non-negative: `CD* - D M(-∞) D* ≤ 0`, or `h ≤ α`.
pub fn nonneg_check(spec: &ExtensionSpec, limits: &WeylLimits, tol: f64) -> Result<Qualified<bool>, TripletError> {
    if let (ExtensionSpec::ScalarH(h), Some(alpha)) = (spec, limits.scalar()) {
        if h.is_nan() || *h == f64::INFINITY {
            return Err(TripletError::BadParameter(format!("h = {h}")));
        }
        return Ok(Qualified { value: *h <= alpha + tol, warnings: limit_warnings(limits) });
    }
    let k = kappa_minus(spec, limits, tol)?;
    Ok(Qualified { value: k.value == 0, warnings: k.warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    IsFriedrichs,
    IsKrein,
    NonNeg,
    Indefinite(usize),
}

/// Identifies the Friedrichs (`h = α`, scalar only) and Krein (`D = O`)
/// extensions, otherwise reports `κ₋`.
pub fn classify(spec: &ExtensionSpec, limits: &WeylLimits, tol: f64) -> Result<Qualified<Classification>, TripletError> {
    let p = limits.m_minus_inf.rows();
    let warnings = limit_warnings(limits);
    match spec {
        ExtensionSpec::Friedrichs => return Ok(Qualified { value: Classification::IsFriedrichs, warnings }),
        ExtensionSpec::Krein => return Ok(Qualified { value: Classification::IsKrein, warnings }),
        ExtensionSpec::Pair { c, d } => {
            spec.pair(p, Some(limits))?;
            if !selfadjoint_check(c, d, STRUCT_TOL)? {
                return Err(TripletError::NotSelfAdjoint);
            }
            if d.max_abs() == 0.0 {
                return Ok(Qualified { value: Classification::IsKrein, warnings });
            }
        }
        ExtensionSpec::ScalarH(_) => {}
    }
    if let (Some(h), Some(alpha)) = (spec.scalar_h(), limits.scalar()) {
        if h == f64::NEG_INFINITY {
            return Ok(Qualified { value: Classification::IsKrein, warnings });
        }
        if (h - alpha).abs() <= tol * alpha.abs().max(1.0) {
            return Ok(Qualified { value: Classification::IsFriedrichs, warnings });
        }
    }
    let k = kappa_minus(spec, limits, tol)?;
    let value = match k.value {
        0 => Classification::NonNeg,
        n => Classification::Indefinite(n),
    };
    Ok(Qualified { value, warnings: k.warnings })
}

/// Default inertia band for `κ` computations.
pub const KAPPA_TOL: f64 = DEFAULT_ZERO_TOL;

#[cfg(test)]
mod tests;
