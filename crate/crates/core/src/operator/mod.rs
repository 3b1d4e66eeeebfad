//! The block Jacobi operator: coefficient sources, action on finitely
//! supported vectors, finite sections, non-negativity and sign utilities.

pub mod fixtures;
pub mod moments;
pub mod source;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::exactq::{BigRational, ExactTridiag};
use crate::numkernel::{hermitian_eigen, invert, CMat, Inertia, NumError, C64, DEFAULT_TOL};

pub use fixtures::{fix_blk, fix_geo, fix_lap, fix_ln, fixture};
pub use moments::{gauss_rule_moments, log_normal_moments, recurrence_from_moments, MomentSequence, SupportClaim};
pub use source::{ClosedForm, CoeffSource, Explicit, MixedSum, MomentSource, Scaled, SignNormalized};

/// Relative tolerance for `A_j = A_j*`.
const HERMITIAN_TOL: f64 = 1e-13;
/// Relative pivot threshold when inverting `B_j`.
const B_COND_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("B_{j} is singular")]
    SingularB { j: usize },
    #[error("A_{j} is not Hermitian")]
    NonHermitianA { j: usize },
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("moment sequence is not Stieltjes-positive at order {order}")]
    HankelNotPositive { order: usize },
    #[error("operation needs a scalar (p = 1) operator")]
    NotScalar,
    #[error("off-diagonal coefficient b_{j} is not real")]
    ComplexOffDiagonal { j: usize },
    #[error("off-diagonal coefficient b_{j} vanishes")]
    ZeroOffDiagonal { j: usize },
    #[error("coefficient {j} leaves the double range")]
    CoefficientOverflow { j: usize },
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Semi-infinite block Jacobi operator with `p×p` blocks.
#[derive(Clone)]
pub struct BlockJacobi {
    p: usize,
    source: Arc<dyn CoeffSource>,
    label: String,
}

impl fmt::Debug for BlockJacobi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockJacobi").field("p", &self.p).field("label", &self.label).finish()
    }
}

/// Coefficient blocks at one index, with `B_j⁻¹`.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub a: CMat,
    pub b: CMat,
    pub b_inv: CMat,
}

impl BlockJacobi {
    pub fn new(source: Arc<dyn CoeffSource>, label: impl Into<String>) -> Self {
        Self { p: source.p(), source, label: label.into() }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> &Arc<dyn CoeffSource> {
        &self.source
    }

    /// Validated `(A_j, B_j, B_j⁻¹)`.
    pub fn blocks(&self, j: usize) -> Result<Blocks, OpError> {
        let (a, b) = self.source.blocks(j)?;
        if !a.is_finite() || !b.is_finite() {
            return Err(OpError::CoefficientOverflow { j });
        }
        if a.hermitian_defect() > HERMITIAN_TOL * a.max_abs().max(1.0) {
            return Err(OpError::NonHermitianA { j });
        }
        let b_inv = invert(&b, B_COND_TOL).map_err(|_| OpError::SingularB { j })?;
        Ok(Blocks { a, b, b_inv })
    }

    /// Exact `(a_j, b_j²)` for scalar rational operators.
    pub fn exact(&self, j: usize) -> Option<Result<(BigRational, BigRational), OpError>> {
        self.source.exact(j)
    }

    pub fn has_exact(&self) -> bool {
        self.p == 1 && self.source.has_exact()
    }

    pub fn specified_depth(&self) -> Option<usize> {
        self.source.specified_depth()
    }

    pub fn prefetch(&self, depth: usize) -> Result<(), OpError> {
        self.source.prefetch(depth)
    }

    /// Exact `(a_0..a_{n-1}, b²_0..b²_{n-1})`.
    pub fn exact_coefficients(&self, n: usize) -> Option<Result<(Vec<BigRational>, Vec<BigRational>), OpError>> {
        if !self.has_exact() {
            return None;
        }
        if let Err(e) = self.prefetch(n) {
            return Some(Err(e));
        }
        let mut a = Vec::with_capacity(n);
        let mut b2 = Vec::with_capacity(n);
        for j in 0..n {
            match self.exact(j)? {
                Ok((x, y)) => {
                    a.push(x);
                    b2.push(y);
                }
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok((a, b2)))
    }
}

/// Finitely supported vector `u = (u_0, …, u_{support_max})`, `u_j ∈ ℂ^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    p: usize,
    blocks: Vec<Vec<C64>>,
}

impl CoeffVector {
    pub fn zeros(p: usize, len: usize) -> Self {
        Self { p, blocks: vec![vec![C64::new(0.0, 0.0); p]; len.max(1)] }
    }

    pub fn from_blocks(p: usize, blocks: Vec<Vec<C64>>) -> Self {
        assert!(blocks.iter().all(|b| b.len() == p), "block length must equal p");
        let mut v = Self { p, blocks };
        if v.blocks.is_empty() {
            v.blocks.push(vec![C64::new(0.0, 0.0); p]);
        }
        v
    }

    pub fn from_reals(x: &[f64]) -> Self {
        Self::from_blocks(1, x.iter().map(|&v| vec![C64::new(v, 0.0)]).collect())
    }

    /// `e_j ⊗ w`.
    pub fn unit(j: usize, w: &[C64]) -> Self {
        let mut v = Self::zeros(w.len(), j + 1);
        v.blocks[j] = w.to_vec();
        v
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Index of the last stored block.
    pub fn support_max(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[Vec<C64>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> Option<&[C64]> {
        self.blocks.get(j).map(|b| b.as_slice())
    }

    pub fn block_mut(&mut self, j: usize) -> &mut Vec<C64> {
        if j >= self.blocks.len() {
            self.blocks.resize(j + 1, vec![C64::new(0.0, 0.0); self.p]);
        }
        &mut self.blocks[j]
    }

    pub fn flatten(&self) -> Vec<C64> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// `(self, other) = Σ_j other_j* self_j`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.blocks.iter().zip(&other.blocks).flat_map(|(x, y)| x.iter().zip(y)).map(|(a, b)| b.conj() * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().flatten().all(|x| *x == C64::new(0.0, 0.0))
    }
}

/// `(Ju)_j = B_j u_{j+1} + A_j u_j + B_{j-1}* u_{j-1}`.
pub fn apply(j_op: &BlockJacobi, u: &CoeffVector) -> Result<CoeffVector, OpError> {
    let p = j_op.p();
    assert_eq!(u.p(), p, "vector block size differs from the operator's");
    let n = u.support_max() + 1;
    let mut out = CoeffVector::zeros(p, n + 1);
    let mut prev_b: Option<CMat> = None;
    for j in 0..=n {
        let bl = j_op.blocks(j)?;
        let mut acc = vec![C64::new(0.0, 0.0); p];
        if let Some(uj1) = u.block(j + 1) {
            add_into(&mut acc, &bl.b.mul_vec(uj1));
        }
        if let Some(uj) = u.block(j) {
            add_into(&mut acc, &bl.a.mul_vec(uj));
        }
        if j > 0 {
            if let (Some(bp), Some(ujm)) = (prev_b.as_ref(), u.block(j - 1)) {
                add_into(&mut acc, &bp.adjoint().mul_vec(ujm));
            }
        }
        out.blocks[j] = acc;
        prev_b = Some(bl.b);
    }
    Ok(out)
}

fn add_into(acc: &mut [C64], x: &[C64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

/// The `pN×pN` block tridiagonal truncation.
pub fn finite_section(j_op: &BlockJacobi, n: usize) -> Result<CMat, OpError> {
    assert!(n >= 1, "section size must be positive");
    let p = j_op.p();
    let mut m = CMat::zeros(p * n, p * n);
    for j in 0..n {
        let bl = j_op.blocks(j)?;
        m.set_block(j * p, j * p, &bl.a);
        if j + 1 < n {
            m.set_block(j * p, (j + 1) * p, &bl.b);
            m.set_block((j + 1) * p, j * p, &bl.b.adjoint());
        }
    }
    Ok(m)
}

/// Exact `N×N` truncation of a scalar rational operator.
pub fn exact_section(j_op: &BlockJacobi, n: usize) -> Option<Result<ExactTridiag, OpError>> {
    assert!(n >= 1, "section size must be positive");
    let coeffs = j_op.exact_coefficients(n)?;
    Some(coeffs.and_then(|(a, mut b2)| {
        b2.truncate(n - 1);
        if let Some(j) = b2.iter().position(|x| !x.is_positive()) {
            return Err(OpError::ZeroOffDiagonal { j });
        }
        Ok(ExactTridiag::new(a, b2))
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum NonnegVerdict {
    NonNegUpTo(usize),
    NegativeAt { n: usize, lambda_min: f64 },
}

/// Checks `λ_min(J_N) ≥ -tol` for every `N ≤ n_max`.
///
/// Rational scalar operators are counted exactly with one Sturm pass; other
/// operators use block LDL* pivots of `J_N + tol·I`, whose inertia is that of
/// the section by Haynsworth additivity.
pub fn nonneg_probe(j_op: &BlockJacobi, n_max: usize, tol: f64) -> Result<NonnegVerdict, OpError> {
    assert!(n_max >= 1);
    if let Some(t) = exact_section(j_op, n_max) {
        let t = t?;
        let shift = -BigRational::from_f64(tol).ok_or_else(|| OpError::BadParam("tolerance".into()))?;
        let run = t.sturm(&shift);
        return Ok(match run.below.iter().position(|&c| c > 0) {
            None => NonnegVerdict::NonNegUpTo(n_max),
            Some(k) => NonnegVerdict::NegativeAt { n: k + 1, lambda_min: t.leading(k + 1).eigenvalue(0, 1e-15, 1e-300) },
        });
    }
    let p = j_op.p();
    let mut pivot: Option<CMat> = None;
    let mut prev_b: Option<CMat> = None;
    for n in 1..=n_max {
        let bl = j_op.blocks(n - 1)?;
        let mut d = &bl.a + &CMat::identity(p).scale_real(tol);
        if let (Some(dp), Some(bp)) = (pivot.as_ref(), prev_b.as_ref()) {
            let dinv = match invert(dp, DEFAULT_TOL) {
                Ok(x) => x,
                // a singular pivot breaks the factorization; fall back to the spectrum
                Err(_) => return probe_by_eigen(j_op, n, n_max, tol),
            };
            d = &d - &(&(&bp.adjoint() * &dinv) * bp);
        }
        let d = d.hermitian_part();
        let e = hermitian_eigen(&d, DEFAULT_TOL)?;
        if Inertia::from_values(&e.values, 0.0).n_neg > 0 {
            let lambda_min = hermitian_eigen(&finite_section(j_op, n)?, DEFAULT_TOL)?.values[0];
            return Ok(NonnegVerdict::NegativeAt { n, lambda_min });
        }
        pivot = Some(d);
        prev_b = Some(bl.b);
    }
    Ok(NonnegVerdict::NonNegUpTo(n_max))
}

fn probe_by_eigen(j_op: &BlockJacobi, from: usize, n_max: usize, tol: f64) -> Result<NonnegVerdict, OpError> {
    for n in from..=n_max {
        let lambda_min = hermitian_eigen(&finite_section(j_op, n)?, DEFAULT_TOL)?.values[0];
        if lambda_min < -tol {
            return Ok(NonnegVerdict::NegativeAt { n, lambda_min });
        }
    }
    Ok(NonnegVerdict::NonNegUpTo(n_max))
}

/// Diagonal `±1` conjugation relating an operator to its sign-normalized form:
/// `J' = S J S` with `S = diag(signs)`.
#[derive(Debug, Clone)]
pub struct SignFlip {
    source: BlockJacobi,
}

impl SignFlip {
    /// `ε_0 = 1`, `ε_{j+1} = ε_j · sgn(b_j)`.
    pub fn signs(&self, n: usize) -> Result<Vec<f64>, OpError> {
        let mut out = Vec::with_capacity(n);
        let mut e = 1.0;
        for j in 0..n {
            out.push(e);
            let b = self.source.source().blocks(j)?.1[(0, 0)].re;
            e *= b.signum();
        }
        Ok(out)
    }
}

/// Replaces every `b_j` by `|b_j|` (scalar, real off-diagonals).
pub fn sign_normalize(j_op: &BlockJacobi) -> Result<(BlockJacobi, SignFlip), OpError> {
    if j_op.p() != 1 {
        return Err(OpError::NotScalar);
    }
    let check_depth = j_op.specified_depth().unwrap_or(64);
    for j in 0..check_depth {
        let (_, b) = j_op.source().blocks(j)?;
        let x = b[(0, 0)];
        if x.im != 0.0 {
            return Err(OpError::ComplexOffDiagonal { j });
        }
        if x.re == 0.0 {
            return Err(OpError::ZeroOffDiagonal { j });
        }
    }
    let normalized = BlockJacobi::new(Arc::new(SignNormalized::new(j_op.source().clone())), j_op.label().to_string());
    Ok((normalized, SignFlip { source: j_op.clone() }))
}

/// Scalar operator whose orthonormal polynomials are those of the moment functional.
pub fn jacobi_from_moments(m: &MomentSequence) -> Result<BlockJacobi, OpError> {
    let src = MomentSource::finite(m.moments())?;
    Ok(BlockJacobi::new(Arc::new(src), format!("moments[{}]", m.len())))
}
