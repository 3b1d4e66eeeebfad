//! Exact moment → recurrence-coefficient conversion (modified Chebyshev
//! algorithm with ordinary moments), entirely in rationals.

use crate::exactq::BigRational;

use super::OpError;

/// Moment sequence claimed to come from a positive measure on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    m: Vec<BigRational>,
}

/// Which support the moment sequence is claimed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportClaim {
    Stieltjes,
}

impl MomentSequence {
    /// Validates `m₀ > 0` and Stieltjes positivity to the available order.
    pub fn new(m: Vec<BigRational>) -> Result<Self, OpError> {
        if m.is_empty() || !m[0].is_positive() {
            return Err(OpError::HankelNotPositive { order: 0 });
        }
        recurrence_from_moments(&m)?;
        Ok(Self { m })
    }

    pub fn moments(&self) -> &[BigRational] {
        &self.m
    }

    pub fn support_claim(&self) -> SupportClaim {
        SupportClaim::Stieltjes
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

/// Recurrence coefficients from moments `m_0..m_{L-1}`.
///
/// Returns `(a, b2)` with `b2.len() = floor((L-1)/2)` and `a.len()` equal to
/// `b2.len()` or one more when `L` is even. Fails if the Hankel forms of
/// `(m_{i+j})` or `(m_{i+j+1})` stop being positive.
pub fn recurrence_from_moments(m: &[BigRational]) -> Result<(Vec<BigRational>, Vec<BigRational>), OpError> {
    let len = m.len();
    if len == 0 || !m[0].is_positive() {
        return Err(OpError::HankelNotPositive { order: 0 });
    }
    let pairs = (len - 1) / 2;
    let n_a = len / 2;
    let mut a: Vec<BigRational> = Vec::with_capacity(n_a);
    let mut b2: Vec<BigRational> = Vec::with_capacity(pairs);
    if n_a == 0 {
        return Ok((a, b2));
    }

    // sigma_k[l] = L(pi_k x^l); rows indexed by l, only l >= k is meaningful
    let mut prev: Vec<BigRational> = vec![BigRational::zero(); len];
    let mut cur: Vec<BigRational> = m.to_vec();
    a.push(cur[1].checked_div(&cur[0]).map_err(|_| OpError::HankelNotPositive { order: 0 })?);

    // pi_k(0), for the positivity of the shifted Hankel form
    let mut pi_prev = BigRational::one();
    let mut pi_cur = -&a[0];
    if pi_cur.signum() != -1 {
        return Err(OpError::HankelNotPositive { order: 1 });
    }

    for k in 1..=pairs {
        let mut next = vec![BigRational::zero(); len];
        for l in k..len - k {
            let mut v = &cur[l + 1] - &(&a[k - 1] * &cur[l]);
            if k >= 2 {
                v = v - &b2[k - 2] * &prev[l];
            }
            next[l] = v;
        }
        if !next[k].is_positive() {
            return Err(OpError::HankelNotPositive { order: k });
        }
        b2.push(next[k].checked_div(&cur[k - 1]).expect("positive pivot"));
        if k < n_a {
            let ak = next[k + 1].checked_div(&next[k]).expect("positive pivot")
                - cur[k].checked_div(&cur[k - 1]).expect("positive pivot");
            // monic pi_{k+1}(0) = -a_k pi_k(0) - b2_{k-1} pi_{k-1}(0)
            let pi_next = -(&ak * &pi_cur) - &b2[k - 1] * &pi_prev;
            let want = if (k + 1) % 2 == 0 { 1 } else { -1 };
            if pi_next.signum() != want {
                return Err(OpError::HankelNotPositive { order: k + 1 });
            }
            pi_prev = std::mem::replace(&mut pi_cur, pi_next);
            a.push(ak);
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok((a, b2))
}

/// Moments `θ^{n²}` for `n < count`.
pub fn log_normal_moments(theta: u32, count: usize) -> Vec<BigRational> {
    let t = num_bigint::BigInt::from(theta);
    (0..count).map(|n| BigRational::from_integer(num_traits::pow(t.clone(), n * n))).collect()
}

/// Moments `Σ w_k x_k^n`, `n < count`, of the `N`-point Gauss rule of the
/// section `J_N`, which equal `m₀ (J_N^n)_{00}`. The walk runs on the
/// similar matrix with unit superdiagonal and `b²` subdiagonal, so every
/// entry stays rational.
pub fn gauss_rule_moments(m0: &BigRational, a: &[BigRational], b2: &[BigRational], n: usize, count: usize) -> Vec<BigRational> {
    assert!(n >= 1 && a.len() >= n && b2.len() + 1 >= n, "need N diagonal and N-1 off-diagonal entries");
    let mut w = vec![BigRational::zero(); n];
    w[0] = BigRational::one();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(m0 * &w[0]);
        let next = (0..n)
            .map(|i| {
                let mut v = &a[i] * &w[i];
                if i > 0 {
                    v = v + &b2[i - 1] * &w[i - 1];
                }
                if i + 1 < n {
                    v = v + &w[i + 1];
                }
                v
            })
            .collect();
        w = next;
    }
    out
}
