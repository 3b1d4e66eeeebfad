//! Symmetric tridiagonal matrices with rational diagonal and rational squared
//! off-diagonal, with eigenvalue counts done exactly by Sturm sequences.

use num_bigint::BigInt;

use rayon::prelude::*;

use super::{lcm, BigRational};

/// Denominators wider than this are left inside the recurrence rather than
/// folded into the common scale factor.
const SCALE_DENOM_BITS: u64 = 4096;

/// Real symmetric tridiagonal matrix stored as `diag` and the squares of the
/// (positive) off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTridiag {
    diag: Vec<BigRational>,
    offsq: Vec<BigRational>,
}

/// Result of one Sturm pass at a shift σ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SturmRun {
    /// `below[k]` = number of eigenvalues `< σ` of the leading `(k+1)×(k+1)` block.
    pub below: Vec<usize>,
    /// `zero[k]` = σ is an eigenvalue of the leading `(k+1)×(k+1)` block.
    pub zero: Vec<bool>,
}

impl ExactTridiag {
    /// Panics unless `offsq.len() + 1 == diag.len()` and every `offsq` entry is positive.
    pub fn new(diag: Vec<BigRational>, offsq: Vec<BigRational>) -> Self {
        assert!(!diag.is_empty(), "empty tridiagonal matrix");
        assert_eq!(offsq.len() + 1, diag.len(), "off-diagonal length mismatch");
        assert!(offsq.iter().all(|o| o.is_positive()), "squared off-diagonals must be positive");
        Self { diag, offsq }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[BigRational] {
        &self.diag
    }

    pub fn offsq(&self) -> &[BigRational] {
        &self.offsq
    }

    /// Replaces the last diagonal entry.
    pub fn with_last_diag(&self, v: BigRational) -> Self {
        let mut out = self.clone();
        *out.diag.last_mut().expect("nonempty") = v;
        out
    }

    /// Leading `k×k` block.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.n());
        Self { diag: self.diag[..k].to_vec(), offsq: self.offsq[..k - 1].to_vec() }
    }

    /// Sturm pass at σ, reporting counts for every leading block at once.
    pub fn sturm(&self, sigma: &BigRational) -> SturmRun {
        let small = |d: &BigInt| d.bits() <= SCALE_DENOM_BITS;
        let mut l = sigma.denom().clone();
        for d in &self.diag {
            if small(d.denom()) {
                l = lcm(&l, d.denom());
            }
        }
        for o in &self.offsq {
            if small(o.denom()) {
                l = lcm(&l, o.denom());
            }
        }
        let lq = BigRational::from_integer(l.clone());
        let l2 = BigRational::from_integer(&l * &l);

        let n = self.n();
        let mut below = Vec::with_capacity(n);
        let mut zero = Vec::with_capacity(n);
        let mut pm2 = BigRational::zero();
        let mut pm1 = BigRational::one();
        let mut last_sign = 1i32;
        let mut changes = 0usize;
        for j in 0..n {
            let a = &(&self.diag[j] - sigma) * &lq;
            let mut pj = &a * &pm1;
            if j > 0 {
                let o = &self.offsq[j - 1] * &l2;
                pj = pj - &o * &pm2;
            }
            let s = pj.signum();
            if s != 0 {
                if s != last_sign {
                    changes += 1;
                }
                last_sign = s;
            }
            below.push(changes);
            zero.push(s == 0);
            pm2 = pm1;
            pm1 = pj;
        }
        SturmRun { below, zero }
    }

    /// Number of eigenvalues strictly below σ.
    pub fn count_below(&self, sigma: &BigRational) -> usize {
        *self.sturm(sigma).below.last().expect("nonempty")
    }

    pub fn is_eigenvalue(&self, sigma: &BigRational) -> bool {
        *self.sturm(sigma).zero.last().expect("nonempty")
    }

    /// Dyadic interval containing the whole spectrum (Gershgorin discs).
    pub fn gershgorin(&self) -> (BigRational, BigRational) {
        let n = self.n();
        let offs: Vec<BigRational> = self.offsq.iter().map(|o| o.sqrt_upper()).collect();
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        for j in 0..n {
            let mut r = BigRational::zero();
            if j > 0 {
                r = r + &offs[j - 1];
            }
            if j + 1 < n {
                r = r + &offs[j];
            }
            let a = &self.diag[j] - &r;
            let b = &self.diag[j] + &r;
            if lo.as_ref().is_none_or(|x| a < *x) {
                lo = Some(a);
            }
            if hi.as_ref().is_none_or(|x| b > *x) {
                hi = Some(b);
            }
        }
        let lo = dyadic_floor(&lo.expect("nonempty")) - BigRational::one();
        let hi = dyadic_ceil(&hi.expect("nonempty")) + BigRational::one();
        (lo, hi)
    }

    /// Interval `[lo, hi)` containing the `k`-th smallest eigenvalue (0-based),
    /// narrowed until `hi - lo <= max(abs_tol, rel_tol * max(|lo|, |hi|))`.
    pub fn eigenvalue_bracket(&self, k: usize, rel_tol: f64, abs_tol: f64) -> (BigRational, BigRational) {
        assert!(k < self.n());
        let (mut lo, mut hi) = self.gershgorin();
        let rel = BigRational::from_f64(rel_tol).expect("finite tolerance");
        let abs = BigRational::from_f64(abs_tol).expect("finite tolerance");
        let two = BigRational::from_i64(2);
        loop {
            let width = &hi - &lo;
            let scale = std::cmp::max(lo.abs(), hi.abs());
            if width <= abs || width <= &rel * &scale {
                return (lo, hi);
            }
            let mid = geometric_mid(&lo, &hi, &abs).unwrap_or_else(|| (&lo + &hi).checked_div(&two).expect("two"));
            if self.count_below(&mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// Midpoint estimate of the `k`-th eigenvalue, or the lower end of the
    /// bracket when that end is the eigenvalue itself.
    pub fn eigenvalue(&self, k: usize, rel_tol: f64, abs_tol: f64) -> f64 {
        let (lo, hi) = self.eigenvalue_bracket(k, rel_tol, abs_tol);
        let at_lo = self.sturm(&lo);
        if *at_lo.zero.last().expect("nonempty") && *at_lo.below.last().expect("nonempty") == k {
            return lo.to_f64().unwrap_or(if lo.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY });
        }
        let mid = (&lo + &hi).checked_div(&BigRational::from_i64(2)).expect("two");
        mid.to_f64().unwrap_or(if mid.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
    }

    /// All eigenvalues ascending, each to the given tolerances.
    pub fn eigenvalues(&self, rel_tol: f64, abs_tol: f64) -> Vec<f64> {
        (0..self.n()).into_par_iter().map(|k| self.eigenvalue(k, rel_tol, abs_tol)).collect()
    }

    /// Eigenvalues strictly below `cutoff`, ascending.
    pub fn eigenvalues_below(&self, cutoff: &BigRational, rel_tol: f64, abs_tol: f64) -> Vec<f64> {
        let m = self.count_below(cutoff);
        (0..m).into_par_iter().map(|k| self.eigenvalue(k, rel_tol, abs_tol)).collect()
    }

    /// Float copy of the matrix entries (diagonal, off-diagonal).
    pub fn to_f64_entries(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.diag.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        let o = self.offsq.iter().map(|x| x.sqrt_to_f64()).collect();
        (d, o)
    }
}

fn dyadic_floor(q: &BigRational) -> BigRational {
    let s = q.mul_pow2(64);
    let f = num_integer::Integer::div_floor(s.numer(), s.denom());
    BigRational::from_integer(f).mul_pow2(-64)
}

fn dyadic_ceil(q: &BigRational) -> BigRational {
    -dyadic_floor(&-q)
}

/// Power-of-two point strictly inside `(lo, hi)` splitting it geometrically,
/// used while the interval spans several binades on one side of zero.
fn geometric_mid(lo: &BigRational, hi: &BigRational, abs_tol: &BigRational) -> Option<BigRational> {
    let (a, b, neg) = if !lo.is_negative() {
        (lo.clone(), hi.clone(), false)
    } else if !hi.is_positive() {
        (-hi, -lo, true)
    } else {
        return None;
    };
    let a = if &a < abs_tol { abs_tol.clone() } else { a };
    if b <= a.mul_pow2(2) {
        return None;
    }
    let ea = super::rational::approx_log2(&a);
    let eb = super::rational::approx_log2(&b);
    let m = BigRational::one().mul_pow2((ea + eb).div_euclid(2));
    let m = if neg { -m } else { m };
    (m > *lo && m < *hi).then_some(m)
}
