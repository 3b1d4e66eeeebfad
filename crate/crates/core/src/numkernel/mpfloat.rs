//! Fixed-precision binary floating point on top of `BigInt`.
//!
//! Every value is `mant * 2^exp` with `|mant| < 2^prec`; each operation rounds
//! to nearest, ties to even. Used where a double cannot hold the dynamic
//! range but exact rationals would grow too large.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactq::BigRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

impl MpFloat {
    pub fn zero(prec: u32) -> Self {
        Self { mant: BigInt::zero(), exp: 0, prec }
    }

    pub fn from_i64(x: i64, prec: u32) -> Self {
        Self::round(BigInt::from(x), 0, false, prec)
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        let q = BigRational::from_f64(x).expect("finite value");
        Self::from_rational(&q, prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        if q.is_zero() {
            return Self::zero(prec);
        }
        // enough quotient bits for a correctly rounded result
        let shift = prec as i64 + 2 + q.denom().bits() as i64 - q.numer().bits() as i64;
        let (n, d) = if shift >= 0 {
            (q.numer() << (shift as usize), q.denom().clone())
        } else {
            (q.numer().clone(), q.denom() << ((-shift) as usize))
        };
        let (m, r) = n.div_rem(&d);
        Self::round(m, -shift, !r.is_zero(), prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::from_integer(self.mant.clone()).mul_pow2(self.exp)
    }

    /// Nearest double, saturating to ±inf.
    pub fn to_f64(&self) -> f64 {
        match crate::exactq::q_to_float(&self.to_rational(), 53) {
            Ok(r) => r.to_f64(),
            Err(_) if self.is_negative() => f64::NEG_INFINITY,
            Err(_) => f64::INFINITY,
        }
    }

    /// Rounds `m * 2^e` to `prec` bits; `sticky` marks a discarded nonzero tail
    /// below the last bit of `m`.
    fn round(m: BigInt, e: i64, sticky: bool, prec: u32) -> Self {
        if m.is_zero() {
            return Self::zero(prec);
        }
        let bits = m.bits();
        if bits <= prec as u64 {
            return Self { mant: m, exp: e, prec };
        }
        let shift = (bits - prec as u64) as usize;
        let neg = m.is_negative();
        let mag = m.magnitude();
        let mut q = mag >> shift;
        let half = num_bigint::BigUint::one() << (shift - 1);
        let rem = mag - (&q << shift);
        let up = match rem.cmp(&half) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => sticky || q.is_odd(),
        };
        if up {
            q += 1u32;
        }
        let mut exp = e + shift as i64;
        if q.bits() > prec as u64 {
            q >>= 1usize;
            exp += 1;
        }
        let mant = BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, q);
        Self { mant, exp, prec }
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, i64) {
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as usize);
        let b = &other.mant << ((other.exp - e) as usize);
        (a, b, e)
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        if self.is_zero() {
            return Self::round(other.mant.clone(), other.exp, false, prec);
        }
        if other.is_zero() {
            return Self::round(self.mant.clone(), self.exp, false, prec);
        }
        // far-apart exponents: the smaller term only acts as a sticky bit
        let top_s = self.exp + self.mant.bits() as i64;
        let top_o = other.exp + other.mant.bits() as i64;
        let gap_limit = prec as i64 + 4;
        if (top_s - top_o).abs() > gap_limit {
            let (big, small) = if top_s > top_o { (self, other) } else { (other, self) };
            let k = (gap_limit - big.mant.bits() as i64) as usize;
            let m = (&big.mant << k) + small.mant.signum();
            return Self::round(m, big.exp - k as i64, false, prec);
        }
        let (a, b, e) = self.aligned(other);
        Self::round(a + b, e, false, prec)
    }

    pub fn neg(&self) -> Self {
        Self { mant: -&self.mant, exp: self.exp, prec: self.prec }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        Self::round(&self.mant * &other.mant, self.exp + other.exp, false, prec)
    }

    /// Panics on division by zero.
    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "MpFloat division by zero");
        let prec = self.prec.max(other.prec);
        if self.is_zero() {
            return Self::zero(prec);
        }
        let shift = prec as i64 + 2 + other.mant.bits() as i64 - self.mant.bits() as i64;
        let shift = shift.max(0) as usize;
        let (q, r) = (&self.mant << shift).div_rem(&other.mant);
        Self::round(q, self.exp - other.exp - shift as i64, !r.is_zero(), prec)
    }

    /// Panics on a negative argument.
    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "MpFloat sqrt of a negative value");
        if self.is_zero() {
            return self.clone();
        }
        let prec = self.prec;
        let mut shift = (2 * (prec as i64 + 2) - self.mant.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = &self.mant << (shift as usize);
        let r = m.sqrt();
        let exact = &r * &r == m;
        Self::round(r, (self.exp - shift) / 2, !exact, prec)
    }

    pub fn abs(&self) -> Self {
        Self { mant: self.mant.abs(), exp: self.exp, prec: self.prec }
    }
}

impl PartialOrd for MpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.sub(other).signum().cmp(&0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_arithmetic() {
        let p = 80;
        let a = MpFloat::from_i64(3, p);
        let b = MpFloat::from_i64(7, p);
        assert_eq!(a.add(&b).to_f64(), 10.0);
        assert_eq!(a.sub(&b).to_f64(), -4.0);
        assert_eq!(a.mul(&b).to_f64(), 21.0);
        assert_eq!(a.div(&b).to_f64(), 3.0 / 7.0);
        assert_eq!(MpFloat::from_i64(2, p).sqrt().to_f64(), 2f64.sqrt());
        assert_eq!(MpFloat::from_i64(16, p).sqrt().to_f64(), 4.0);
        assert_eq!(MpFloat::from_f64(0.125, p).sqrt().to_f64(), 0.125f64.sqrt());
    }

    #[test]
    fn huge_and_tiny_parts_survive() {
        let p = 400;
        let big = MpFloat::from_rational(&BigRational::from_integer(BigInt::one() << 300usize), p);
        let one = MpFloat::from_i64(1, p);
        let s = big.add(&one).sub(&big);
        assert_eq!(s.to_f64(), 1.0);
        let low = MpFloat::from_i64(1, 53);
        let tiny = MpFloat::from_rational(&BigRational::one().mul_pow2(-200), 53);
        assert_eq!(low.add(&tiny).to_f64(), 1.0);
        assert!(low.add(&tiny).sub(&low).is_zero());
    }

    #[test]
    fn rational_rounding_matches_f64() {
        for (n, d) in [(1i64, 3i64), (-22, 7), (5, 1 << 20), (123456789, 1000)] {
            let q = BigRational::ratio(n, d).unwrap();
            assert_eq!(MpFloat::from_rational(&q, 53).to_f64(), n as f64 / d as f64);
        }
    }

    #[test]
    fn ordering() {
        let a = MpFloat::from_f64(1.5, 64);
        let b = MpFloat::from_f64(-2.0, 64);
        assert!(b < a);
        assert!(a.abs() < b.abs());
    }
}
