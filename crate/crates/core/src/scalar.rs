//! Numeric abstraction. Every stage that manipulates values or weights is
//! generic over [`Scalar`]. Exact implementations report zero tolerance, so
//! comparisons in generic code degrade to exact comparisons.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    /// Exact when `Self` is exact; otherwise rounds to nearest.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_ratio(r: &BigRational) -> Self;
    /// `None` for non-finite floats.
    fn to_ratio(&self) -> Option<BigRational>;
    /// Comparison slack; zero for exact types.
    fn tolerance() -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(&BigRational::from_integer(BigInt::from(n)))
    }

    /// `self > 0`. Unlike `Signed::is_positive`, false for `+0.0`.
    fn strictly_positive(&self) -> bool {
        *self > Self::zero()
    }

    /// `self < 0`. Unlike `Signed::is_negative`, false for `-0.0`.
    fn strictly_negative(&self) -> bool {
        *self < Self::zero()
    }

    /// Integer close to `log2(self)` for positive `self`; refined by callers.
    fn log2_estimate(&self) -> i64 {
        let v = self.to_f64();
        if v > 0.0 && v.is_finite() {
            v.log2().floor() as i64
        } else {
            0
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_ratio(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_ratio(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
    fn tolerance() -> Self {
        1e-12
    }
    fn from_usize(n: usize) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn from_ratio(r: &BigRational) -> Self {
        ToPrimitive::to_f32(r).unwrap_or(f32::NAN)
    }
    fn to_ratio(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
    fn tolerance() -> Self {
        1e-6
    }
    fn from_usize(n: usize) -> Self {
        n as f32
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }
    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_ratio(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn tolerance() -> Self {
        BigRational::zero()
    }
    fn log2_estimate(&self) -> i64 {
        self.numer().bits() as i64 - self.denom().bits() as i64
    }
}

/// `2^e`, exact for exact types.
pub fn pow2<S: Scalar>(e: i64) -> S {
    let two = BigInt::from(2u8);
    let p = num_traits::pow(two, e.unsigned_abs() as usize);
    if e >= 0 {
        S::from_ratio(&BigRational::from_integer(p))
    } else {
        S::from_ratio(&BigRational::new(BigInt::one(), p))
    }
}

/// The exponent `e` with `2^e <= x < 2^(e+1)`, for `x > 0`.
pub fn floor_log2<S: Scalar>(x: &S) -> i64 {
    assert!(x.strictly_positive(), "floor_log2 of a non-positive value");
    let mut e = x.log2_estimate();
    while pow2::<S>(e) > *x {
        e -= 1;
    }
    while pow2::<S>(e + 1) <= *x {
        e += 1;
    }
    e
}

/// Largest power of two not exceeding `x > 0`.
pub fn floor_pow2<S: Scalar>(x: &S) -> S {
    pow2(floor_log2(x))
}

/// `a >= b - tol`.
pub fn approx_ge<S: Scalar>(a: &S, b: &S) -> bool {
    a.clone() + S::tolerance() >= *b
}

/// `a <= b + tol`.
pub fn approx_le<S: Scalar>(a: &S, b: &S) -> bool {
    *a <= b.clone() + S::tolerance()
}

/// `ceil(log2(n))` for `n >= 1`; zero for `n <= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// `floor(n / alpha)` computed exactly for a positive rational `alpha`.
pub fn floor_div(n: usize, alpha: &BigRational) -> usize {
    let q = BigInt::from(n) * alpha.denom();
    let (d, _) = q.div_mod_floor(alpha.numer());
    d.to_usize().unwrap_or(usize::MAX)
}

/// Parses `"p/q"`, integers and decimal literals into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().ok()? };
        let scale = num_traits::pow(BigInt::from(10u8), frac.len());
        let frac_part: BigInt = frac.parse().ok()?;
        let signed_frac = if neg { -frac_part } else { frac_part };
        return Some(BigRational::new(int_part * &scale + signed_frac, scale));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Canonical text form: `"p"` or `"p/q"`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn floor_pow2_matches_float_and_rational() {
        assert_eq!(floor_pow2(&0.3f64), 0.25);
        assert_eq!(floor_pow2(&1.0f64), 1.0);
        assert_eq!(floor_pow2(&q(3, 10)), q(1, 4));
        assert_eq!(floor_pow2(&q(1, 8)), q(1, 8));
        assert_eq!(floor_log2(&q(1, 1 << 40)), -40);
    }

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(
            (1..=9).map(ceil_log2).collect::<Vec<_>>(),
            vec![0, 1, 2, 2, 3, 3, 3, 3, 4]
        );
    }

    #[test]
    fn floor_div_is_exact_where_floats_are_not() {
        assert_eq!(floor_div(7, &q(7, 3)), 3);
        assert_eq!(floor_div(1, &q(2, 1)), 0);
        assert_eq!(floor_div(10, &q(3, 1)), 3);
    }

    #[test]
    fn rational_text_roundtrip() {
        assert_eq!(parse_rational("3/4"), Some(q(3, 4)));
        assert_eq!(parse_rational("0.1"), Some(q(1, 10)));
        assert_eq!(parse_rational("-1.25"), Some(q(-5, 4)));
        assert_eq!(parse_rational("12"), Some(q(12, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&q(6, 4)), "3/2");
        assert_eq!(format_rational(&q(4, 2)), "2");
    }

    proptest! {
        #[test]
        fn floor_pow2_brackets_value(num in 1i64..1_000_000, den in 1i64..1_000_000) {
            let x = q(num, den);
            let p = floor_pow2(&x);
            prop_assert!(p <= x);
            prop_assert!(p * q(2, 1) > x);
        }

        #[test]
        fn float_and_rational_floor_log2_agree(x in 1e-9f64..1e9) {
            prop_assert_eq!(floor_log2(&x), floor_log2(&BigRational::from_float(x).unwrap()));
        }
    }
}
