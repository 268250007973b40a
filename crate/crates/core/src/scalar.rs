//! Scalar abstraction shared by automata, matrices and spectral bounds.
//!
//! Everything that only needs a semiring (census, path counts, matrix
//! assembly) works for any [`Scalar`]. Spectral enclosures are *certified*
//! only when [`Scalar::EXACT`] holds; with `f32`/`f64` the same code runs but
//! the bounds inherit floating-point rounding.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

/// Numeric type usable as an edge weight or matrix entry.
pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Send + Sync + 'static {
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    /// Converts a finite float, exactly when the type allows it.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Largest multiple of `2^-bits` not above `self`. Identity for floats.
    fn round_down(&self, _bits: u32) -> Self {
        self.clone()
    }

    /// Smallest multiple of `2^-bits` not below `self`. Identity for floats.
    fn round_up(&self, _bits: u32) -> Self {
        self.clone()
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Option<Self> {
        let y = x as f32;
        y.is_finite().then_some(y)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_zero() {
                0.0
            } else if *self > BigRational::zero() {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        })
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn round_down(&self, bits: u32) -> Self {
        let scale = BigRational::from_integer(BigInt::one() << bits);
        (self * &scale).floor() / scale
    }

    fn round_up(&self, bits: u32) -> Self {
        let scale = BigRational::from_integer(BigInt::one() << bits);
        (self * &scale).ceil() / scale
    }
}

pub(crate) fn partial_min<W: PartialOrd + Clone>(a: &W, b: &W) -> W {
    if b < a {
        b.clone()
    } else {
        a.clone()
    }
}

pub(crate) fn partial_max<W: PartialOrd + Clone>(a: &W, b: &W) -> W {
    if b > a {
        b.clone()
    } else {
        a.clone()
    }
}

/// Parses `"3"`, `"-2/7"`, `"0.001"` or `"1e-9"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let shift = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(digits);
    if shift >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Some(if negative { -value } else { value })
}

/// Formats a rational as a decimal with `places` digits, rounding toward
/// `-inf` (`up == false`) or `+inf` (`up == true`).
pub fn format_decimal(value: &BigRational, places: usize, up: bool) -> String {
    let scale = BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let scaled = value * &scale;
    let int = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let negative = int < BigInt::zero();
    let digits = if negative { -&int } else { int.clone() }.to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (whole, frac) = digits.split_at(digits.len() - places);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        <BigRational as Scalar>::from_ratio(n, d)
    }

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_rational("3"), Some(q(3, 1)));
        assert_eq!(parse_rational("-2/7"), Some(q(-2, 7)));
        assert_eq!(parse_rational("0.001"), Some(q(1, 1000)));
        assert_eq!(parse_rational("1e-9"), Some(q(1, 1_000_000_000)));
        assert_eq!(parse_rational("2.5E2"), Some(q(250, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn directed_decimal_rounding() {
        let third = q(1, 3);
        assert_eq!(format_decimal(&third, 4, false), "0.3333");
        assert_eq!(format_decimal(&third, 4, true), "0.3334");
        assert_eq!(format_decimal(&q(3, 1), 2, true), "3.00");
        assert_eq!(format_decimal(&q(-1, 3), 2, false), "-0.34");
    }

    #[test]
    fn dyadic_rounding_brackets() {
        let x = q(1, 3);
        let lo = x.round_down(10);
        let hi = x.round_up(10);
        assert!(lo <= x && x <= hi);
        assert_eq!(&hi - &lo, q(1, 1024));
        assert_eq!(q(3, 1).round_up(64), q(3, 1));
    }

    #[test]
    fn float_conversion_is_exact_for_rationals() {
        let r = <BigRational as Scalar>::from_f64(0.1).unwrap();
        assert_eq!(Scalar::to_f64(&r), 0.1);
        assert_ne!(r, q(1, 10));
    }
}
