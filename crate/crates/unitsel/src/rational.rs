//! Exact rational scalars: construction helpers, string parsing, and decimal
//! presentation.
//!
//! Every probability and coefficient in this crate is an exact rational; no
//! floating point is used anywhere in a computation. Decimal output exists
//! only as a presentation layer and is never fed back into arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
///
/// Always held in canonical reduced form with a positive denominator
/// (maintained by `num_rational`).
pub type Rational = BigRational;

/// `n/d` as an exact rational.
///
/// Panics if `d` is zero; intended for literals in code and tests.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?}")]
    Invalid(String),
    #[error("denominator must be a positive integer in {0:?}")]
    BadDenominator(String),
    #[error("exponent out of range in {0:?}")]
    ExponentOutOfRange(String),
}

/// Parses `"p/q"`, integer, and decimal forms (optionally with an exponent,
/// e.g. `"2.5e-3"`) into an exact rational.
///
/// Decimal literals are read as exact scaled integers: `"0.087"` is
/// `87/1000`, never a float.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let text = s.trim();
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((num, den)) = text.split_once('/') {
        let numer = parse_signed_integer(num.trim())
            .ok_or_else(|| ParseRationalError::Invalid(s.to_string()))?;
        let denom = parse_unsigned_integer(den.trim())
            .ok_or_else(|| ParseRationalError::BadDenominator(s.to_string()))?;
        if denom.is_zero() {
            return Err(ParseRationalError::BadDenominator(s.to_string()));
        }
        return Ok(Rational::new(numer, denom));
    }
    parse_decimal(text).ok_or_else(|| ParseRationalError::Invalid(s.to_string()))
}

fn parse_signed_integer(s: &str) -> Option<BigInt> {
    let (sign, digits) = split_sign(s)?;
    let magnitude = parse_unsigned_integer(digits)?;
    Some(if sign < 0 { -magnitude } else { magnitude })
}

fn parse_unsigned_integer(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse::<BigInt>().ok()
}

fn split_sign(s: &str) -> Option<(i8, &str)> {
    match s.as_bytes().first()? {
        b'-' => Some((-1, &s[1..])),
        b'+' => Some((1, &s[1..])),
        _ => Some((1, s)),
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (sign, rest) = split_sign(s)?;
    let (mantissa, exponent) = match rest.split_once(['e', 'E']) {
        Some((m, e)) => (m, parse_signed_integer(e)?.to_i32()?),
        None => (rest, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let unscaled = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse::<BigInt>().ok()?
    };
    // Guard pathological exponents before computing 10^k.
    if exponent.unsigned_abs() + frac_part.len() as u32 > 100_000 {
        return None;
    }
    let scale = exponent - frac_part.len() as i32;
    let value = if scale >= 0 {
        Rational::from_integer(unscaled * BigInt::from(10u32).pow(scale as u32))
    } else {
        Rational::new(unscaled, BigInt::from(10u32).pow(scale.unsigned_abs()))
    };
    Some(if sign < 0 { -value } else { value })
}

/// Renders `r` exactly: `p/q` in lowest terms, or just `p` for integers.
pub fn format_exact(r: &Rational) -> String {
    r.to_string()
}

/// Renders `r` rounded to `precision` decimal places, ties away from zero.
pub fn format_decimal(r: &Rational, precision: usize) -> String {
    let scale = BigInt::from(10u32).pow(precision as u32);
    let scaled = r.abs() * Rational::from_integer(scale);
    // floor(|r|*10^p + 1/2): round half away from zero.
    let rounded = (scaled + ratio(1, 2)).floor().to_integer();
    let sign = if r.is_negative() && !rounded.is_zero() {
        "-"
    } else {
        ""
    };
    if precision == 0 {
        return format!("{sign}{rounded}");
    }
    let digits = rounded.to_string();
    let padded = if digits.len() <= precision {
        format!("{}{}", "0".repeat(precision + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = padded.len() - precision;
    format!("{sign}{}.{}", &padded[..split], &padded[split..])
}
