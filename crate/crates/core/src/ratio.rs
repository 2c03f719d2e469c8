//! Exact rational parameters and integer-count thresholds.
//!
//! Every threshold of the form `count <= x*s` or `count >= x*s` is decided
//! by exact comparison against the rational `x*s`; no rounding is applied
//! to the real bound itself.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse {0:?} as an exact rational (expected \"p/q\", an integer or a decimal)")]
pub struct ParseRationalError(pub String);

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `2^k` for any integer `k`.
pub fn pow2(k: i32) -> Rational {
    let one = BigInt::one();
    if k >= 0 {
        Rational::from_integer(one << k as usize)
    } else {
        Rational::new(one.clone(), one << (-k) as usize)
    }
}

/// Parses `"p/q"`, `"7"`, `"-0.125"` or `"2^-9"`.
pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some(k) = t.strip_prefix("2^") {
        let k: i32 = k.trim().parse().map_err(|_| err())?;
        return Ok(pow2(k));
    }
    if let Some((whole, fracpart)) = t.split_once('.') {
        if fracpart.is_empty() || !fracpart.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, fracpart);
        let mut num: BigInt = digits.parse().map_err(|_| err())?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), fracpart.len());
        return Ok(Rational::new(num, den));
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

/// Canonical `"p/q"` text (integers print as `"p/1"`).
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Largest integer count `c >= 0` with `c <= bound`, or `None` if the bound is negative.
pub fn max_count_at_most(bound: &Rational) -> Option<usize> {
    if bound.is_negative() {
        return None;
    }
    Some(bound.numer().div_floor(bound.denom()).to_usize().unwrap_or(usize::MAX))
}

/// Smallest integer count `c >= 0` with `c >= bound`.
pub fn min_count_at_least(bound: &Rational) -> usize {
    if !bound.is_positive() {
        return 0;
    }
    bound.numer().div_ceil(bound.denom()).to_usize().unwrap_or(usize::MAX)
}

pub fn count_le(count: usize, bound: &Rational) -> bool {
    Rational::from_integer(BigInt::from(count)) <= *bound
}
