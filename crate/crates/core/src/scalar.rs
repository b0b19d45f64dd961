//! Scalar types that weights, heuristic values and g-costs are computed in.
//!
//! Everything that compares scores is generic over [`Scalar`]. Exact
//! certificates use [`Rational`](crate::Rational); unit-weight sweeps can run
//! in `i64`; the subgradient learner runs in `f64`.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// A totally comparable number type.
///
/// Values handled by the search engines are finite by construction, so
/// `partial_cmp` never returns `None` in practice; [`Scalar::cmp_total`]
/// panics if it does.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `true` for types whose arithmetic is exact (integers, rationals).
    const EXACT: bool;

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.partial_cmp(other)
            .expect("scalar comparison on a non-finite value")
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer not representable in scalar type")
    }
}

impl Scalar for i64 {
    const EXACT: bool = true;
}

impl Scalar for i128 {
    const EXACT: bool = true;
}

impl Scalar for Ratio<i64> {
    const EXACT: bool = true;
}

impl Scalar for BigRational {
    const EXACT: bool = true;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

/// Wrapper giving any [`Scalar`] a total `Ord`, for use as an ordered-set key.
#[derive(Clone, Debug, PartialEq)]
pub struct Ordered<T>(pub T);

impl<T: Scalar> Eq for Ordered<T> {}

impl<T: Scalar> PartialOrd for Ordered<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Ordered<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_total(&other.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("exponent notation is not accepted: `{0}`")]
    Exponent(String),
}

/// Parses `"p/q"`, integers, and plain decimals (`"-1.25"`) exactly.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if s.contains(['e', 'E']) {
        return Err(ParseRationalError::Exponent(s.to_string()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let p = parse_int(num.trim(), s)?;
        let q = parse_int(den.trim(), s)?;
        if q.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let digits_ok = !frac_part.is_empty() && frac_part.bytes().all(|b| b.is_ascii_digit());
        if !digits_ok {
            return Err(ParseRationalError::Malformed(s.to_string()));
        }
        let whole = match int_part {
            "" | "-" | "+" => BigInt::zero(),
            other => parse_int(other, s)?,
        };
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = parse_int(frac_part, s)?;
        let magnitude = whole.abs() * &scale + frac;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(numer, scale));
    }
    Ok(BigRational::from_integer(parse_int(s, s)?))
}

fn parse_int(part: &str, whole: &str) -> Result<BigInt, ParseRationalError> {
    let body = part.strip_prefix(['+', '-']).unwrap_or(part);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::Malformed(whole.to_string()));
    }
    BigInt::from_str(part).map_err(|_| ParseRationalError::Malformed(whole.to_string()))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise (lowest terms).
pub fn format_rational(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(value: f64) -> Option<BigRational> {
    BigRational::from_float(value)
}

pub fn rational_from_int(value: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}

pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Converts between scalar types through `f64` unless both sides are exact.
pub fn convert<A: Scalar, B: Scalar>(value: &A) -> B {
    if let Some(v) = value.to_i64() {
        if A::from_i64(v).as_ref() == Some(value) {
            return B::from_int(v);
        }
    }
    B::from_f64(value.as_f64()).expect("value not representable in target scalar")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("-1.25").unwrap(), rational(-5, 4));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("-0.5").unwrap(), rational(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), rational(7, 1));
        assert_eq!(parse_rational(" 0.1 ").unwrap(), rational(1, 10));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_rational("1e3"), Err(ParseRationalError::Exponent(_))));
        assert!(matches!(parse_rational("1/0"), Err(ParseRationalError::ZeroDenominator(_))));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/-").is_err());
    }

    #[test]
    fn formats_lowest_terms() {
        assert_eq!(format_rational(&rational(4, 2)), "2");
        assert_eq!(format_rational(&rational(-3, 9)), "-1/3");
    }

    #[test]
    fn conversion_keeps_integers_exact() {
        let r: BigRational = convert(&5i64);
        assert_eq!(r, rational(5, 1));
        let f: f64 = convert(&rational(1, 4));
        assert_eq!(f, 0.25);
    }
}
