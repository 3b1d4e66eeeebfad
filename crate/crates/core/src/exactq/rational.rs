//! Canonical arbitrary-precision rationals.
//!
//! The integer carrier is `num_bigint::BigInt`; canonicalization, the integer
//! fast paths and the rounding to binary floats live here.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::QError;

/// Exact rational `numer / denom` with `denom > 0` and `gcd(|numer|, denom) = 1`.
/// Zero is always stored as `0/1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigRational {
    numer: BigInt,
    denom: BigInt,
}

impl BigRational {
    pub fn zero() -> Self {
        Self { numer: BigInt::zero(), denom: BigInt::one() }
    }

    pub fn one() -> Self {
        Self { numer: BigInt::one(), denom: BigInt::one() }
    }

    pub fn from_integer(n: BigInt) -> Self {
        Self { numer: n, denom: BigInt::one() }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_integer(BigInt::from(n))
    }

    /// Builds `n / d` in canonical form.
    pub fn new(n: BigInt, d: BigInt) -> Result<Self, QError> {
        if d.is_zero() {
            return Err(QError::DivisionByZero);
        }
        Ok(Self::reduce(n, d))
    }

    pub fn ratio(n: i64, d: i64) -> Result<Self, QError> {
        Self::new(BigInt::from(n), BigInt::from(d))
    }

    fn reduce(mut n: BigInt, mut d: BigInt) -> Self {
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        if n.is_zero() {
            return Self::zero();
        }
        if d.is_one() {
            return Self { numer: n, denom: d };
        }
        // exact division is far cheaper than a gcd on large operands
        let (q, r) = n.div_rem(&d);
        if r.is_zero() {
            return Self { numer: q, denom: BigInt::one() };
        }
        let g = n.gcd(&d);
        if !g.is_one() {
            n /= &g;
            d /= &g;
        }
        Self { numer: n, denom: d }
    }

    /// Exact value of a finite double (every finite double is dyadic).
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Self::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let m = BigInt::from(mant) * sign;
        Some(if e >= 0 {
            Self::from_integer(m << (e as usize))
        } else {
            Self::reduce(m, BigInt::one() << ((-e) as usize))
        })
    }

    pub fn numer(&self) -> &BigInt {
        &self.numer
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.denom.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.numer.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.numer.is_positive()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.numer.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Self { numer: self.numer.abs(), denom: self.denom.clone() }
    }

    pub fn recip(&self) -> Result<Self, QError> {
        if self.is_zero() {
            return Err(QError::DivisionByZero);
        }
        let (n, d) = if self.numer.is_negative() {
            (-self.denom.clone(), -self.numer.clone())
        } else {
            (self.denom.clone(), self.numer.clone())
        };
        Ok(Self { numer: n, denom: d })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, QError> {
        if rhs.is_zero() {
            return Err(QError::DivisionByZero);
        }
        Ok(self.mul_ref(&rhs.recip()?))
    }

    pub fn pow(&self, e: u32) -> Self {
        Self { numer: num_traits::pow(self.numer.clone(), e as usize), denom: num_traits::pow(self.denom.clone(), e as usize) }
    }

    pub fn square(&self) -> Self {
        Self { numer: &self.numer * &self.numer, denom: &self.denom * &self.denom }
    }

    /// Multiplication by `2^k` (k may be negative).
    pub fn mul_pow2(&self, k: i64) -> Self {
        if k >= 0 {
            Self::reduce(&self.numer << (k as usize), self.denom.clone())
        } else {
            Self::reduce(self.numer.clone(), &self.denom << ((-k) as usize))
        }
    }

    /// Rational upper bound `u >= sqrt(self)` with relative slack below `2^-60`.
    /// Requires `self >= 0`.
    pub fn sqrt_upper(&self) -> Self {
        assert!(!self.is_negative(), "sqrt_upper of a negative rational");
        if self.is_zero() {
            return Self::zero();
        }
        // sqrt(n/d) = sqrt(n d) / d, scaled by 2^k for resolution
        let k = 64usize;
        let nd = (&self.numer * &self.denom).magnitude() << (2 * k);
        let r = nd.sqrt() + BigUint::one();
        Self::reduce(BigInt::from(r), &self.denom << k)
    }

    /// Nearest double to `sqrt(self)` within one ulp; works far beyond the
    /// double range of `self` itself.
    pub fn sqrt_to_f64(&self) -> f64 {
        assert!(!self.is_negative(), "sqrt_to_f64 of a negative rational");
        if self.is_zero() {
            return 0.0;
        }
        let e = approx_log2(self);
        // scale so that the integer square root has about 64 significant bits
        let k = 64 - e.div_euclid(2);
        let scaled = self.mul_pow2(2 * k);
        let int = scaled.numer.magnitude() / scaled.denom.magnitude();
        let r = int.sqrt();
        ldexp(r.to_f64().unwrap_or(f64::INFINITY), -k)
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        if self.denom.is_one() && rhs.denom.is_one() {
            return Self { numer: &self.numer * &rhs.numer, denom: BigInt::one() };
        }
        let g1 = if rhs.denom.is_one() { BigInt::one() } else { self.numer.gcd(&rhs.denom) };
        let g2 = if self.denom.is_one() { BigInt::one() } else { rhs.numer.gcd(&self.denom) };
        let n = (&self.numer / &g1) * (&rhs.numer / &g2);
        let d = (&self.denom / &g2) * (&rhs.denom / &g1);
        Self { numer: n, denom: d }
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if self.denom.is_one() && rhs.denom.is_one() {
            return Self::from_integer(&self.numer + &rhs.numer);
        }
        if self.denom == rhs.denom {
            return Self::reduce(&self.numer + &rhs.numer, self.denom.clone());
        }
        let g = self.denom.gcd(&rhs.denom);
        if g.is_one() {
            let n = &self.numer * &rhs.denom + &rhs.numer * &self.denom;
            let d = &self.denom * &rhs.denom;
            return if n.is_zero() { Self::zero() } else { Self { numer: n, denom: d } };
        }
        let n = &self.numer * (&rhs.denom / &g) + &rhs.numer * (&self.denom / &g);
        Self::reduce(n, &self.denom / &g * &rhs.denom)
    }

    /// Nearest double (round half to even); `None` on overflow.
    pub fn to_f64(&self) -> Option<f64> {
        super::q_to_float(self, 53).ok().map(|r| r.to_f64())
    }
}

/// `floor(log2 |q|)` for nonzero q.
pub(crate) fn approx_log2(q: &BigRational) -> i64 {
    let nb = q.numer.magnitude().bits() as i64;
    let db = q.denom.magnitude().bits() as i64;
    let mut e = nb - db;
    // |n| >= |d| * 2^e ?
    let n = q.numer.magnitude();
    let d = q.denom.magnitude();
    let ge = if e >= 0 { *n >= (d << (e as usize)) } else { (n << ((-e) as usize)) >= *d };
    if !ge {
        e -= 1;
    }
    e
}

/// `x * 2^e` without intermediate overflow or premature underflow.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Ord for BigRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.denom == other.denom {
            return self.numer.cmp(&other.numer);
        }
        let s = self.signum().cmp(&other.signum());
        if s != Ordering::Equal {
            return s;
        }
        (&self.numer * &other.denom).cmp(&(&other.numer * &self.denom))
    }
}

impl PartialOrd for BigRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BigRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom.is_one() {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom)
        }
    }
}

impl fmt::Debug for BigRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for BigRational {
    type Err = QError;

    /// Accepts `n`, `n/d` and plain decimals such as `-0.125` or `1e-3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || QError::Parse(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            return Self::new(n, d);
        }
        if let Ok(n) = s.parse::<BigInt>() {
            return Ok(Self::from_integer(n));
        }
        // decimal with optional exponent, parsed exactly
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
            None => (s, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let scale = exp - frac.len() as i64;
        let ten = BigInt::from(10);
        let mut q = if scale >= 0 {
            Self::from_integer(digits * num_traits::pow(ten, scale as usize))
        } else {
            Self::new(digits, num_traits::pow(ten, (-scale) as usize))?
        };
        if neg {
            q = -q;
        }
        Ok(q)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:expr) => {
        impl $tr<&BigRational> for &BigRational {
            type Output = BigRational;
            fn $method(self, rhs: &BigRational) -> BigRational {
                $inner(self, rhs)
            }
        }
        impl $tr<BigRational> for BigRational {
            type Output = BigRational;
            fn $method(self, rhs: BigRational) -> BigRational {
                $inner(&self, &rhs)
            }
        }
        impl $tr<&BigRational> for BigRational {
            type Output = BigRational;
            fn $method(self, rhs: &BigRational) -> BigRational {
                $inner(&self, rhs)
            }
        }
        impl $tr<BigRational> for &BigRational {
            type Output = BigRational;
            fn $method(self, rhs: BigRational) -> BigRational {
                $inner(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &BigRational, b: &BigRational| a.add_ref(b));
forward_binop!(Sub, sub, |a: &BigRational, b: &BigRational| a.add_ref(&-b));
forward_binop!(Mul, mul, |a: &BigRational, b: &BigRational| a.mul_ref(b));
// panics on a zero divisor; use `checked_div` / `q_arith` for a Result
forward_binop!(Div, div, |a: &BigRational, b: &BigRational| a
    .checked_div(b)
    .expect("division of BigRational by zero"));

impl Neg for BigRational {
    type Output = BigRational;
    fn neg(self) -> BigRational {
        BigRational { numer: -self.numer, denom: self.denom }
    }
}

impl Neg for &BigRational {
    type Output = BigRational;
    fn neg(self) -> BigRational {
        BigRational { numer: -&self.numer, denom: self.denom.clone() }
    }
}

impl From<i64> for BigRational {
    fn from(n: i64) -> Self {
        Self::from_i64(n)
    }
}

impl From<BigInt> for BigRational {
    fn from(n: BigInt) -> Self {
        Self::from_integer(n)
    }
}

impl std::iter::Sum for BigRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a BigRational> for BigRational {
    fn sum<I: Iterator<Item = &'a BigRational>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

impl serde::Serialize for BigRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for BigRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) => n.to_string().parse().map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!("expected rational, got {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_forms() {
        let x = BigRational::ratio(6, -4).unwrap();
        assert_eq!(x.numer(), &BigInt::from(-3));
        assert_eq!(x.denom(), &BigInt::from(2));
        assert_eq!(BigRational::ratio(0, -7).unwrap(), BigRational::zero());
        assert_eq!(BigRational::ratio(0, -7).unwrap().denom(), &BigInt::one());
    }

    #[test]
    fn parses_decimal_and_fraction() {
        assert_eq!(q("1/3") + q("1/6"), q("1/2"));
        assert_eq!(q("-0.125"), q("-1/8"));
        assert_eq!(q("2.5e2"), q("250"));
        assert_eq!(q("1e-3"), q("1/1000"));
        assert!("abc".parse::<BigRational>().is_err());
        assert!("1/0".parse::<BigRational>().is_err());
    }

    #[test]
    fn from_f64_is_exact() {
        assert_eq!(BigRational::from_f64(0.375).unwrap(), q("3/8"));
        let tiny = BigRational::from_f64(f64::from_bits(1)).unwrap();
        assert_eq!(tiny.denom(), &(BigInt::one() << 1074usize));
        assert!(BigRational::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn ordering() {
        assert!(q("1/3") < q("1/2"));
        assert!(q("-1/2") < q("-1/3"));
        assert!(q("-1") < q("0"));
    }

    #[test]
    fn sqrt_helpers() {
        let two = q("2");
        let u = two.sqrt_upper();
        assert!(&u * &u >= two);
        assert!((u.to_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let huge = BigRational::from_integer(BigInt::one() << 3000usize);
        assert_eq!(huge.sqrt_to_f64(), ldexp(1.0, 1500));
        assert!((q("1/9").sqrt_to_f64() - 1.0 / 3.0).abs() < 1e-16);
    }
}
