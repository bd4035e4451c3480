//! Exact rational scalars and the exact/float scalar abstraction.
//!
//! Every engine in the crate is generic over [`Scalar`], so the same
//! transcript can be produced over ℚ (bit-exact) or over `f64` with an
//! absolute zero tolerance.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ArithError;

/// Default absolute zero tolerance of the float backend.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-9;

/// Arbitrary-precision rational in canonical form (denominator > 0, reduced).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, ArithError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }

    /// `numer / denom` for small literals; panics on a zero denominator.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("nonzero denominator")
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn signum(&self) -> Ordering {
        if self.0.is_zero() {
            Ordering::Equal
        } else if self.0.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self, ArithError> {
        if rhs.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// Exact value of a finite float.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Rational)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Huge numerator/denominator pairs overflow the direct conversion.
            let n = self.0.numer().bits() as i64;
            let d = self.0.denom().bits() as i64;
            let shift = (n.max(d) - 1000).max(0) as usize;
            let num = (self.0.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let den = (self.0.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            num / den
        })
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Smallest non-negative integer `k` with `k² >= self` (self >= 0).
    pub fn ceil_sqrt(&self) -> BigInt {
        debug_assert!(!self.0.is_negative());
        // k² >= n/d  <=>  k² d >= n
        let n = self.0.numer();
        let d = self.0.denom();
        let q = n.div_ceil(d);
        let mut k = q.sqrt();
        while &(&k * &k) * d < *n {
            k += 1;
        }
        k
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Rational::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational(v)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_int(v)
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_digits(s: &str, text: &str) -> Result<BigInt, ArithError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ArithError::Parse(text.to_string()));
    }
    s.parse::<BigInt>().map_err(|_| ArithError::Parse(text.to_string()))
}

/// Parses `[-]?digits(/digits)?`.
pub fn rational_of_string(text: &str) -> Result<Rational, ArithError> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (parse_digits(n, text)?, parse_digits(d, text)?),
        None => (parse_digits(body, text)?, BigInt::one()),
    };
    let num = if neg { -num } else { num };
    Rational::new(num, den)
}

impl FromStr for Rational {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        rational_of_string(s)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        rational_of_string(&text).map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$m(&rhs.0))
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational((&self.0).$m(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Division panics on a zero divisor, like the integer types; use
// `checked_div` where the divisor is data-dependent.
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |a, b| a * b)
    }
}

/// How "is zero" is decided.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum ScalarBackend {
    /// Exact equality with zero.
    #[default]
    Exact,
    /// `|value| <= zero_tolerance`.
    Float { zero_tolerance: f64 },
}

impl ScalarBackend {
    pub fn float(zero_tolerance: f64) -> Result<Self, ArithError> {
        if !(zero_tolerance > 0.0 && zero_tolerance.is_finite()) {
            return Err(ArithError::BadTolerance(zero_tolerance));
        }
        Ok(ScalarBackend::Float { zero_tolerance })
    }

    pub fn float_default() -> Self {
        ScalarBackend::Float { zero_tolerance: DEFAULT_ZERO_TOLERANCE }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ScalarBackend::Exact)
    }
}

/// Field element the engines compute with.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(v: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero_under(&self, backend: &ScalarBackend) -> bool;

    /// Sign after the backend's zero test.
    fn sign_under(&self, backend: &ScalarBackend) -> Ordering {
        if self.is_zero_under(backend) {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    fn is_positive(&self) -> bool;
}

impl Scalar for Rational {
    fn zero() -> Self {
        Rational::zero()
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_int(v)
    }

    fn from_rational(v: &Rational) -> Self {
        v.clone()
    }

    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }

    /// Rationals are always compared exactly, whatever the backend says.
    fn is_zero_under(&self, _backend: &ScalarBackend) -> bool {
        self.is_zero()
    }

    fn is_positive(&self) -> bool {
        self.0.is_positive()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(v: &Rational) -> Self {
        v.to_f64()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_zero_under(&self, backend: &ScalarBackend) -> bool {
        match backend {
            ScalarBackend::Exact => *self == 0.0,
            ScalarBackend::Float { zero_tolerance } => self.abs() <= *zero_tolerance,
        }
    }

    fn is_positive(&self) -> bool {
        *self > 0.0
    }
}
