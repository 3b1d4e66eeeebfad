//! Coefficient generators behind [`super::BlockJacobi`].

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::exactq::BigRational;
use crate::numkernel::{CMat, C64};

use super::moments::{log_normal_moments, recurrence_from_moments};
use super::OpError;

/// Lazily evaluated coefficients `j ↦ (A_j, B_j)`.
///
/// Scalar sources with rational data additionally expose `(a_j, b_j²)` with
/// `b_j > 0`; the float blocks are then the rounded values of the exact ones.
pub trait CoeffSource: Send + Sync + fmt::Debug {
    fn p(&self) -> usize;

    fn blocks(&self, j: usize) -> Result<(CMat, CMat), OpError>;

    fn exact(&self, _j: usize) -> Option<Result<(BigRational, BigRational), OpError>> {
        None
    }

    fn has_exact(&self) -> bool {
        false
    }

    /// Number of coefficient pairs actually specified; `None` if unlimited.
    fn specified_depth(&self) -> Option<usize> {
        None
    }

    /// Hint that indices below `depth` are about to be requested.
    fn prefetch(&self, _depth: usize) -> Result<(), OpError> {
        Ok(())
    }
}

/// Float blocks for a scalar exact pair `(a, b²)`.
pub(crate) fn scalar_blocks(j: usize, a: &BigRational, b2: &BigRational) -> Result<(CMat, CMat), OpError> {
    let af = crate::exactq::q_to_float(a, 53).map_err(|_| OpError::CoefficientOverflow { j })?.to_f64();
    let bf = b2.sqrt_to_f64();
    if !af.is_finite() || !bf.is_finite() {
        return Err(OpError::CoefficientOverflow { j });
    }
    Ok((CMat::scalar(af), CMat::scalar(bf)))
}

type ExactFn = dyn Fn(usize) -> (BigRational, BigRational) + Send + Sync;

/// Scalar coefficients given by a closed-form rational rule.
pub struct ClosedForm {
    name: String,
    rule: Box<ExactFn>,
}

impl ClosedForm {
    pub fn new(name: impl Into<String>, rule: impl Fn(usize) -> (BigRational, BigRational) + Send + Sync + 'static) -> Self {
        Self { name: name.into(), rule: Box::new(rule) }
    }
}

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClosedForm({})", self.name)
    }
}

impl CoeffSource for ClosedForm {
    fn p(&self) -> usize {
        1
    }

    fn blocks(&self, j: usize) -> Result<(CMat, CMat), OpError> {
        let (a, b2) = (self.rule)(j);
        scalar_blocks(j, &a, &b2)
    }

    fn exact(&self, j: usize) -> Option<Result<(BigRational, BigRational), OpError>> {
        Some(Ok((self.rule)(j)))
    }

    fn has_exact(&self) -> bool {
        true
    }
}

#[derive(Debug, Default)]
struct MomentCache {
    a: Vec<BigRational>,
    b2: Vec<BigRational>,
    floats: Vec<(f64, f64)>,
}

/// Scalar coefficients derived exactly from moments.
///
/// A `LogNormal(θ)` source regenerates its moments on demand and deepens
/// without bound; a `Finite` source stops at the depth its moments support and
/// repeats its last coefficient pair beyond it.
#[derive(Debug)]
pub struct MomentSource {
    kind: MomentKind,
    cache: Mutex<MomentCache>,
}

#[derive(Debug, Clone)]
enum MomentKind {
    LogNormal(u32),
    Finite(usize),
}

const INITIAL_DEPTH: usize = 48;

impl MomentSource {
    pub fn log_normal(theta: u32) -> Self {
        Self { kind: MomentKind::LogNormal(theta), cache: Mutex::new(MomentCache::default()) }
    }

    /// From a validated moment list; needs at least three moments.
    pub fn finite(m: &[BigRational]) -> Result<Self, OpError> {
        let (a, b2) = recurrence_from_moments(m)?;
        if b2.is_empty() {
            return Err(OpError::BadParam("at least three moments are required".into()));
        }
        let pairs = b2.len();
        let mut cache = MomentCache { a, b2, floats: Vec::new() };
        cache.a.truncate(pairs);
        Ok(Self { kind: MomentKind::Finite(pairs), cache: Mutex::new(cache) })
    }

    fn ensure(&self, depth: usize) -> Result<std::sync::MutexGuard<'_, MomentCache>, OpError> {
        let mut cache = self.cache.lock().expect("coefficient cache poisoned");
        if let MomentKind::LogNormal(theta) = self.kind {
            if cache.b2.len() < depth {
                let target = depth.max(cache.b2.len() * 5 / 4).max(INITIAL_DEPTH);
                let (mut a, b2) = recurrence_from_moments(&log_normal_moments(theta, 2 * target + 1))?;
                a.truncate(b2.len());
                cache.a = a;
                cache.b2 = b2;
            }
        }
        Ok(cache)
    }

    fn index(&self, j: usize) -> usize {
        match self.kind {
            MomentKind::Finite(pairs) => j.min(pairs - 1),
            MomentKind::LogNormal(_) => j,
        }
    }
}

impl CoeffSource for MomentSource {
    fn p(&self) -> usize {
        1
    }

    fn blocks(&self, j: usize) -> Result<(CMat, CMat), OpError> {
        let i = self.index(j);
        let mut cache = self.ensure(i + 1)?;
        // float conversion is lazy: far-out coefficients may leave the double range
        while cache.floats.len() <= i {
            let k = cache.floats.len();
            let (a, b) = scalar_blocks(k, &cache.a[k], &cache.b2[k])?;
            cache.floats.push((a[(0, 0)].re, b[(0, 0)].re));
        }
        let (a, b) = cache.floats[i];
        Ok((CMat::scalar(a), CMat::scalar(b)))
    }

    fn exact(&self, j: usize) -> Option<Result<(BigRational, BigRational), OpError>> {
        let i = self.index(j);
        Some(self.ensure(i + 1).map(|c| (c.a[i].clone(), c.b2[i].clone())))
    }

    fn has_exact(&self) -> bool {
        true
    }

    fn specified_depth(&self) -> Option<usize> {
        match self.kind {
            MomentKind::Finite(pairs) => Some(pairs),
            MomentKind::LogNormal(_) => None,
        }
    }

    fn prefetch(&self, depth: usize) -> Result<(), OpError> {
        self.ensure(self.index(depth.saturating_sub(1)) + 1).map(|_| ())
    }
}

/// Explicit finite coefficient lists; the last pair repeats beyond the list.
#[derive(Debug, Clone)]
pub struct Explicit {
    p: usize,
    a: Vec<CMat>,
    b: Vec<CMat>,
    exact: Option<(Vec<BigRational>, Vec<BigRational>)>,
}

impl Explicit {
    pub fn from_blocks(a: Vec<CMat>, b: Vec<CMat>) -> Result<Self, OpError> {
        if a.is_empty() || b.is_empty() {
            return Err(OpError::BadParam("coefficient lists must be nonempty".into()));
        }
        let p = a[0].rows();
        if a.iter().chain(&b).any(|m| m.rows() != p || m.cols() != p) {
            return Err(OpError::BadParam(format!("all coefficient blocks must be {p}x{p}")));
        }
        Ok(Self { p, a, b, exact: None })
    }

    pub fn from_scalars(a: &[f64], b: &[f64]) -> Result<Self, OpError> {
        Self::from_blocks(a.iter().map(|&x| CMat::scalar(x)).collect(), b.iter().map(|&x| CMat::scalar(x)).collect())
    }

    /// Rational scalar lists; exact data is exposed only when every `b_j > 0`.
    pub fn from_rationals(a: Vec<BigRational>, b: Vec<BigRational>) -> Result<Self, OpError> {
        let af: Vec<f64> = a.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect();
        let bf: Vec<f64> = b.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect();
        if af.iter().chain(&bf).any(|x| !x.is_finite()) {
            return Err(OpError::BadParam("coefficient outside the double range".into()));
        }
        let mut out = Self::from_scalars(&af, &bf)?;
        if b.iter().all(|x| x.is_positive()) {
            let b2 = b.iter().map(|x| x.square()).collect();
            out.exact = Some((a, b2));
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.a.len().min(self.b.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl CoeffSource for Explicit {
    fn p(&self) -> usize {
        self.p
    }

    fn blocks(&self, j: usize) -> Result<(CMat, CMat), OpError> {
        let a = &self.a[j.min(self.a.len() - 1)];
        let b = &self.b[j.min(self.b.len() - 1)];
        Ok((a.clone(), b.clone()))
    }

    fn exact(&self, j: usize) -> Option<Result<(BigRational, BigRational), OpError>> {
        self.exact.as_ref().map(|(a, b2)| Ok((a[j.min(a.len() - 1)].clone(), b2[j.min(b2.len() - 1)].clone())))
    }

    fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    fn specified_depth(&self) -> Option<usize> {
        Some(self.len())
    }
}

/// `U (S₁ ⊕ S₂) U*` for two scalar sources and a fixed 2×2 unitary `U`.
#[derive(Debug)]
pub struct MixedSum {
    first: Arc<dyn CoeffSource>,
    second: Arc<dyn CoeffSource>,
    u: CMat,
}

impl MixedSum {
    pub fn new(first: Arc<dyn CoeffSource>, second: Arc<dyn CoeffSource>, u: CMat) -> Result<Self, OpError> {
        if first.p() != 1 || second.p() != 1 || u.rows() != 2 || u.cols() != 2 {
            return Err(OpError::BadParam("mixed sum needs two scalar sources and a 2x2 unitary".into()));
        }
        Ok(Self { first, second, u })
    }

    /// Rotation by `angle` radians.
    pub fn rotation(angle: f64) -> CMat {
        let (s, c) = angle.sin_cos();
        CMat::from_real_rows(&[vec![c, -s], vec![s, c]])
    }

    pub fn unitary(&self) -> &CMat {
        &self.u
    }

    fn mix(&self, x: C64, y: C64) -> CMat {
        let mut d = CMat::zeros(2, 2);
        d[(0, 0)] = x;
        d[(1, 1)] = y;
        &(&self.u * &d) * &self.u.adjoint()
    }
}

impl CoeffSource for MixedSum {
    fn p(&self) -> usize {
        2
    }

    fn blocks(&self, j: usize) -> Result<(CMat, CMat), OpError> {
        let (a1, b1) = self.first.blocks(j)?;
        let (a2, b2) = self.second.blocks(j)?;
        Ok((self.mix(a1[(0, 0)], a2[(0, 0)]).hermitian_part(), self.mix(b1[(0, 0)], b2[(0, 0)])))
    }

    fn prefetch(&self, depth: usize) -> Result<(), OpError> {
        self.first.prefetch(depth)?;
        self.second.prefetch(depth)
    }
}

/// Scalar source with every off-diagonal replaced by its absolute value.
#[derive(Debug)]
pub struct SignNormalized {
    inner: Arc<dyn CoeffSource>,
}

impl SignNormalized {
    pub fn new(inner: Arc<dyn CoeffSource>) -> Self {
        Self { inner }
    }
}

impl CoeffSource for SignNormalized {
    fn p(&self) -> usize {
        1
    }

    fn blocks(&self, j: usize) -> Result<(CMat, CMat), OpError> {
        let (a, b) = self.inner.blocks(j)?;
        let x = b[(0, 0)];
        if x.im != 0.0 {
            return Err(OpError::ComplexOffDiagonal { j });
        }
        Ok((a, CMat::scalar(x.re.abs())))
    }

    fn exact(&self, j: usize) -> Option<Result<(BigRational, BigRational), OpError>> {
        self.inner.exact(j)
    }

    fn has_exact(&self) -> bool {
        self.inner.has_exact()
    }

    fn specified_depth(&self) -> Option<usize> {
        self.inner.specified_depth()
    }

    fn prefetch(&self, depth: usize) -> Result<(), OpError> {
        self.inner.prefetch(depth)
    }
}

/// Scalar source multiplied by a positive rational constant `c`: `a ↦ c·a`, `b² ↦ c²·b²`.
#[derive(Debug)]
pub struct Scaled {
    inner: Arc<dyn CoeffSource>,
    c: BigRational,
}

impl Scaled {
    pub fn new(inner: Arc<dyn CoeffSource>, c: BigRational) -> Result<Self, OpError> {
        if inner.p() != 1 || !inner.has_exact() || !c.is_positive() {
            return Err(OpError::BadParam("scaling needs an exact scalar source and c > 0".into()));
        }
        Ok(Self { inner, c })
    }
}

impl CoeffSource for Scaled {
    fn p(&self) -> usize {
        1
    }

    fn blocks(&self, j: usize) -> Result<(CMat, CMat), OpError> {
        let (a, b2) = self.exact(j).expect("exact source")?;
        scalar_blocks(j, &a, &b2)
    }

    fn exact(&self, j: usize) -> Option<Result<(BigRational, BigRational), OpError>> {
        self.inner.exact(j).map(|r| r.map(|(a, b2)| (&a * &self.c, &b2 * &self.c.square())))
    }

    fn has_exact(&self) -> bool {
        true
    }

    fn specified_depth(&self) -> Option<usize> {
        self.inner.specified_depth()
    }

    fn prefetch(&self, depth: usize) -> Result<(), OpError> {
        self.inner.prefetch(depth)
    }
}
