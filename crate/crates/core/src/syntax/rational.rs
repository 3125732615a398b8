//! Exact rational numbers with a machine-word fast path.
//!
//! Values that fit in `i64 / i64` are kept inline and only spill to
//! arbitrary precision when an operation overflows. The representation is
//! canonical (lowest terms, positive denominator, inline whenever it fits),
//! so structural equality is numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Clone)]
enum Repr {
    /// Lowest terms, `den > 0`.
    Small(i64, i64),
    Big(Box<BigRational>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(Repr::Small(n, 1))
    }

    /// `num / den`; `None` when `den == 0`.
    pub fn new(num: i64, den: i64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        Some(Self::from_i128(num as i128, den as i128))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(n))
    }

    pub fn from_big(r: BigRational) -> Self {
        // BigRational is already reduced with a positive denominator.
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(r))),
        }
    }

    fn from_i128(mut num: i128, mut den: i128) -> Self {
        debug_assert!(den != 0);
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd_u128(num.unsigned_abs(), den as u128) as i128;
        if g > 1 {
            num /= g;
            den /= g;
        }
        match (i64::try_from(num), i64::try_from(den)) {
            (Ok(n), Ok(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(BigRational::new_raw(BigInt::from(num), BigInt::from(den))))),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    /// Numerator and denominator when both fit in 64 bits.
    pub fn as_small(&self) -> Option<(i64, i64)> {
        match self.0 {
            Repr::Small(n, d) => Some((n, d)),
            Repr::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.denom().is_one(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn signum(&self) -> i32 {
        if self.is_negative() {
            -1
        } else if self.is_zero() {
            0
        } else {
            1
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Truncated subtraction `max(self - other, 0)`.
    pub fn monus(&self, other: &Self) -> Self {
        let d = self - other;
        if d.is_negative() {
            Rational::zero()
        } else {
            d
        }
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        Some(self * &other.recip_unchecked())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip_unchecked())
        }
    }

    fn recip_unchecked(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Self::from_i128(*d as i128, *n as i128),
            Repr::Big(b) => Self::from_big(b.recip()),
        }
    }

    pub fn floor(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Rational::from_integer(n.div_euclid(*d)),
            Repr::Big(b) => Self::from_big(b.floor()),
        }
    }

    pub fn ceil(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => {
                let q = n.div_euclid(*d);
                Rational::from_integer(if n.rem_euclid(*d) == 0 { q } else { q + 1 })
            }
            Repr::Big(b) => Self::from_big(b.ceil()),
        }
    }

    /// The value as an integer, if it is one.
    pub fn to_bigint(&self) -> Option<BigInt> {
        if self.is_integer() {
            Some(self.numer())
        } else {
            None
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self.0 {
            Repr::Small(n, 1) => Some(n),
            _ => None,
        }
    }

    /// Integer power; negative exponents invert. `None` for `0^negative`.
    pub fn pow(&self, exp: i64) -> Option<Self> {
        if exp < 0 {
            return self.recip()?.pow(-exp);
        }
        if let Repr::Small(n, d) = self.0 {
            if let (Ok(e), true) = (u32::try_from(exp), exp < 64) {
                if let (Some(pn), Some(pd)) = (n.checked_pow(e), d.checked_pow(e)) {
                    return Some(Rational(Repr::Small(pn, pd)));
                }
            }
        }
        // Powers of coprime parts stay coprime, so no gcd is needed.
        let e = u32::try_from(exp).ok()?;
        Some(Self::from_big(BigRational::new_raw(self.numer().pow(e), self.denom().pow(e))))
    }

    /// Mathematical remainder for integers: result lies in `[0, |m|)`.
    pub fn rem_euclid(&self, m: &Self) -> Option<Self> {
        if m.is_zero() {
            return None;
        }
        match (&self.0, &m.0) {
            (Repr::Small(a, 1), Repr::Small(b, 1)) => Some(Rational::from_integer(a.rem_euclid(b.abs()))),
            _ => {
                let a = self.to_bigint()?;
                let b = m.to_bigint()?.abs();
                Some(Rational::from_bigint(a.mod_floor(&b)))
            }
        }
    }

    /// Number of bits in the denominator.
    pub fn denom_bits(&self) -> u64 {
        match &self.0 {
            Repr::Small(_, d) => 64 - d.leading_zeros() as u64,
            Repr::Big(b) => b.denom().bits(),
        }
    }

    /// Largest multiple of `2^-bits` not exceeding `self`.
    pub fn floor_to_dyadic(&self, bits: u32) -> Self {
        let scale = BigInt::one() << bits as usize;
        let b = self.to_big();
        let scaled = (b * BigRational::from_integer(scale.clone())).floor();
        Self::from_big(scaled / BigRational::from_integer(scale))
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => big_to_f64(b),
        }
    }

    /// `a/b` with a decimal approximation for non-integers, e.g. `1/3 (0.333333)`.
    pub fn display_with_decimal(&self) -> String {
        if self.is_integer() {
            self.to_string()
        } else {
            format!("{} ({:.6})", self, self.to_f64())
        }
    }
}

fn big_to_f64(b: &BigRational) -> f64 {
    // Shift both parts down to at most ~1000 bits so the float conversion never overflows.
    let (n, d) = (b.numer(), b.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = n >> shift as usize;
    let d = d >> shift as usize;
    match (n.to_f64(), d.to_f64()) {
        (Some(n), Some(d)) if d != 0.0 => n / d,
        _ => f64::NAN,
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational::from_big(r)
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl Ord for Rational {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) if b == d => a.cmp(c),
            _ => cmp_slow(self, other),
        }
    }
}

#[inline(never)]
fn cmp_slow(x: &Rational, y: &Rational) -> Ordering {
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
        _ => x.to_big().cmp(&y.to_big()),
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Each operator inlines the integer case and defers everything else.
macro_rules! arith {
    ($tr:ident, $m:ident, $checked:ident, $slow:ident, $small:expr, $big:tt) => {
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            #[inline]
            fn $m(self, rhs: &Rational) -> Rational {
                if let (Repr::Small(a, 1), Repr::Small(c, 1)) = (&self.0, &rhs.0) {
                    if let Some(r) = a.$checked(*c) {
                        return Rational(Repr::Small(r, 1));
                    }
                }
                $slow(self, rhs)
            }
        }

        #[inline(never)]
        fn $slow(x: &Rational, y: &Rational) -> Rational {
            match (&x.0, &y.0) {
                (Repr::Small(a, b), Repr::Small(c, d)) => {
                    let f: fn(i128, i128, i128, i128) -> Rational = $small;
                    f(*a as i128, *b as i128, *c as i128, *d as i128)
                }
                _ => Rational::from_big(x.to_big() $big y.to_big()),
            }
        }
    };
}

arith!(Add, add, checked_add, add_slow, |a, b, c, d| {
    if b == d {
        Rational::from_i128(a + c, b)
    } else {
        Rational::from_i128(a * d + c * b, b * d)
    }
}, +);
arith!(Sub, sub, checked_sub, sub_slow, |a, b, c, d| {
    if b == d {
        Rational::from_i128(a - c, b)
    } else {
        Rational::from_i128(a * d - c * b, b * d)
    }
}, -);
arith!(Mul, mul, checked_mul, mul_slow, |a, b, c, d| Rational::from_i128(a * c, b * d), *);

impl Neg for &Rational {
    type Output = Rational;
    #[inline]
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) if *n != i64::MIN => Rational(Repr::Small(-n, *d)),
            Repr::Small(n, d) => Rational::from_i128(-(*n as i128), *d as i128),
            Repr::Big(b) => Rational::from_big(-(**b).clone()),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.denom().is_one() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(BigRational::new(n, d))
}

/// Accepts `n`, `-n`, `a/b`, `-a/b` and decimals such as `0.25`.
impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest.trim_start()),
            None => (false, t),
        };
        let value = match body.split_once('/') {
            Some((n, d)) => {
                let n = parse_decimal(n.trim()).ok_or_else(err)?;
                let d = parse_decimal(d.trim()).ok_or_else(err)?;
                if d.is_zero() {
                    return Err(err());
                }
                n / d
            }
            None => parse_decimal(body).ok_or_else(err)?,
        };
        let value = if neg { -value } else { value };
        Ok(Rational::from_big(value))
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
