//! Exact rational arithmetic: the field operations, correctly rounded
//! conversion to binary floats, and exact Sturm counting on rational
//! tridiagonal matrices.

mod rational;
pub mod tridiag;

pub use rational::{ldexp, BigRational};
pub use tridiag::{ExactTridiag, SturmRun};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent exceeds the range of the {bits}-bit target format")]
    Overflow { bits: u32 },
    #[error("unsupported mantissa width {0} (expected 53, 128 or 256)")]
    UnsupportedPrecision(u32),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact field operation with a canonical result.
pub fn q_arith(a: &BigRational, b: &BigRational, op: QOp) -> Result<BigRational, QError> {
    Ok(match op {
        QOp::Add => a + b,
        QOp::Sub => a - b,
        QOp::Mul => a * b,
        QOp::Div => a.checked_div(b)?,
    })
}

/// A binary float `±mantissa · 2^exponent` with `mantissa < 2^bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundedFloat {
    pub negative: bool,
    pub mantissa: BigUint,
    pub exponent: i64,
    pub bits: u32,
}

impl RoundedFloat {
    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Exact rational value.
    pub fn to_rational(&self) -> BigRational {
        let sign = if self.negative { Sign::Minus } else { Sign::Plus };
        let m = BigRational::from_integer(BigInt::from_biguint(sign, self.mantissa.clone()));
        m.mul_pow2(self.exponent)
    }

    /// Nearest double. Exact when the value came from a 53-bit rounding.
    pub fn to_f64(&self) -> f64 {
        if self.bits == 53 {
            let m = self.mantissa.to_f64().unwrap_or(f64::INFINITY);
            let v = ldexp(m, self.exponent);
            if self.negative {
                -v
            } else {
                v
            }
        } else {
            q_to_float(&self.to_rational(), 53).map(|r| r.to_f64()).unwrap_or(if self.negative {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            })
        }
    }

    /// Decimal rendering with enough digits to identify the value at its precision.
    pub fn to_decimal_string(&self) -> String {
        let digits = (self.bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
        to_decimal_string(&self.to_rational(), digits)
    }
}

/// Correctly rounded (nearest, ties to even) conversion to a binary float with
/// `mantissa_bits` significant bits. The 53-bit target is IEEE binary64,
/// including its subnormal range; wider targets use an exponent range of
/// `±2^40`.
pub fn q_to_float(a: &BigRational, mantissa_bits: u32) -> Result<RoundedFloat, QError> {
    let (min_quantum, emax): (i64, i64) = match mantissa_bits {
        53 => (-1074, 1023),
        128 | 256 => (-(1i64 << 40), 1i64 << 40),
        other => return Err(QError::UnsupportedPrecision(other)),
    };
    let negative = a.is_negative();
    if a.is_zero() {
        return Ok(RoundedFloat { negative: false, mantissa: BigUint::zero(), exponent: 0, bits: mantissa_bits });
    }
    let e = rational::approx_log2(a);
    if e > emax {
        return Err(QError::Overflow { bits: mantissa_bits });
    }
    let mut quantum = (e - (mantissa_bits as i64 - 1)).max(min_quantum);
    let num = a.numer().magnitude().clone();
    let den = a.denom().magnitude().clone();
    let (num, den) = if quantum >= 0 { (num, den << (quantum as usize)) } else { (num << ((-quantum) as usize), den) };
    let (mut m, r) = num.div_rem(&den);
    let twice = r << 1usize;
    if twice > den || (twice == den && m.is_odd()) {
        m += 1u32;
    }
    if m.bits() > mantissa_bits as u64 {
        m >>= 1usize;
        quantum += 1;
    }
    if !m.is_zero() && quantum + m.bits() as i64 - 1 > emax {
        return Err(QError::Overflow { bits: mantissa_bits });
    }
    Ok(RoundedFloat { negative: negative && !m.is_zero(), mantissa: m, exponent: quantum, bits: mantissa_bits })
}

/// Scientific decimal rendering rounded to `digits` significant digits.
pub fn to_decimal_string(q: &BigRational, digits: usize) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let ten = BigInt::from(10);
    let abs = q.abs();
    let mut e10 = (rational::approx_log2(&abs) as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let scaled = |e10: i64| -> BigRational {
        let shift = digits as i64 - 1 - e10;
        let p = BigRational::from_integer(num_traits::pow(ten.clone(), shift.unsigned_abs() as usize));
        if shift >= 0 {
            &abs * &p
        } else {
            abs.checked_div(&p).expect("nonzero power of ten")
        }
    };
    let lo = num_traits::pow(ten.clone(), digits - 1);
    let hi = &lo * &ten;
    let mut s = scaled(e10);
    // the estimate may be one off in either direction
    while BigRational::from_integer(hi.clone()) <= s {
        e10 += 1;
        s = scaled(e10);
    }
    while s < BigRational::from_integer(lo.clone()) {
        e10 -= 1;
        s = scaled(e10);
    }
    let (mut m, r) = s.numer().div_rem(s.denom());
    let twice = r * 2;
    if twice > *s.denom() || (twice == *s.denom() && m.is_odd()) {
        m += 1;
    }
    if m == hi {
        m = lo.clone();
        e10 += 1;
    }
    let ds = m.to_string();
    let sign = if q.is_negative() { "-" } else { "" };
    let (head, tail) = ds.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{e10}")
    } else {
        format!("{sign}{head}.{tail}e{e10}")
    }
}

/// `(n d)`-style least common multiple of denominators.
pub(crate) fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_one() {
        return b.clone();
    }
    if b.is_one() {
        return a.clone();
    }
    a.lcm(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> BigRational {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(q_arith(&q("1/3"), &q("1/6"), QOp::Add).unwrap(), q("1/2"));
        let p80 = BigRational::from_integer(BigInt::one() << 80usize);
        let p160 = BigRational::from_integer(BigInt::one() << 160usize);
        assert_eq!(q_arith(&p80, &p80, QOp::Mul).unwrap(), p160);
        assert_eq!(q_arith(&q("3/4"), &q("0"), QOp::Div), Err(QError::DivisionByZero));
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(q_to_float(&q("1/2"), 53).unwrap().to_f64(), 0.5);
        assert_eq!(q_to_float(&q("1/3"), 53).unwrap().to_f64(), 1.0 / 3.0);
        let big = BigRational::from_integer(BigInt::one() << 40000usize);
        assert_eq!(q_to_float(&big, 53), Err(QError::Overflow { bits: 53 }));
        assert!(q_to_float(&big, 128).is_ok());
        assert_eq!(q_to_float(&q("1"), 64), Err(QError::UnsupportedPrecision(64)));
    }

    #[test]
    fn rounding_ties_to_even() {
        // 2^53 + 1 is a tie between 2^53 and 2^53 + 2
        let t = BigRational::from_integer((BigInt::one() << 53usize) + 1);
        assert_eq!(q_to_float(&t, 53).unwrap().to_f64(), 9007199254740992.0);
        let t = BigRational::from_integer((BigInt::one() << 53usize) + 3);
        assert_eq!(q_to_float(&t, 53).unwrap().to_f64(), 9007199254740996.0);
    }

    #[test]
    fn subnormals_and_limits() {
        let tiny = BigRational::from_f64(f64::from_bits(3)).unwrap();
        assert_eq!(q_to_float(&tiny, 53).unwrap().to_f64(), f64::from_bits(3));
        let max = BigRational::from_f64(f64::MAX).unwrap();
        assert_eq!(q_to_float(&max, 53).unwrap().to_f64(), f64::MAX);
        let beyond = &max + &BigRational::from_f64(2f64.powi(970)).unwrap();
        assert_eq!(q_to_float(&beyond, 53), Err(QError::Overflow { bits: 53 }));
    }

    #[test]
    fn wide_precision_is_closer() {
        let third = q("1/3");
        for bits in [128u32, 256] {
            let r = q_to_float(&third, bits).unwrap();
            let err = (r.to_rational() - &third).abs();
            let bound = BigRational::one().mul_pow2(-(bits as i64) - 1);
            assert!(err <= bound);
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal_string(&q("1/3"), 5), "3.3333e-1");
        assert_eq!(to_decimal_string(&q("-2"), 3), "-2.00e0");
        assert_eq!(to_decimal_string(&q("99999/1000"), 3), "1.00e2");
        assert_eq!(q_to_float(&q("1/3"), 128).unwrap().to_decimal_string().len(), 44);
    }

    fn arb_q() -> impl Strategy<Value = BigRational> {
        (
            proptest::collection::vec(any::<u32>(), 1..16),
            proptest::collection::vec(any::<u32>(), 1..16),
            any::<bool>(),
        )
            .prop_map(|(n, d, neg)| {
                let n = BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, BigUint::new(n));
                let d = BigInt::from(BigUint::new(d)) + 1;
                BigRational::new(n, d).unwrap()
            })
    }

    proptest! {
        #[test]
        fn field_axioms(a in arb_q(), b in arb_q(), c in arb_q()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a - &a, BigRational::zero());
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.recip().unwrap(), BigRational::one());
            }
        }

        #[test]
        fn canonical_output(a in arb_q(), b in arb_q()) {
            for op in [QOp::Add, QOp::Sub, QOp::Mul, QOp::Div] {
                if let Ok(r) = q_arith(&a, &b, op) {
                    prop_assert!(r.denom() > &BigInt::zero());
                    prop_assert!(r.numer().gcd(r.denom()).is_one());
                }
            }
        }

        #[test]
        fn f64_rounding_matches_hardware(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let qx = BigRational::from_f64(x).unwrap();
            prop_assert_eq!(q_to_float(&qx, 53).unwrap().to_f64().to_bits(), x.to_bits() & if x == 0.0 { 0 } else { u64::MAX });
        }

        #[test]
        fn division_rounds_like_hardware(a in -1_000_000i64..1_000_000, b in 1i64..1_000_000) {
            let r = q_to_float(&BigRational::ratio(a, b).unwrap(), 53).unwrap().to_f64();
            prop_assert_eq!(r, a as f64 / b as f64);
        }
    }
}
