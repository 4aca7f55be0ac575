//! Exact rational numbers and their text form.

use std::str::FromStr;

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for every value and price.
pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.25`.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let s = text.trim();
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal {text:?}")));
        }
        let negative = whole.starts_with('-');
        let whole = BigInt::from_str(if whole.is_empty() || whole == "-" { "0" } else { whole })
            .map_err(|_| Error::Parse(format!("bad decimal {text:?}")))?;
        let den = num::pow(BigInt::from(10), frac.len());
        let num = BigInt::from_str(frac).map_err(|_| Error::Parse(format!("bad decimal {text:?}")))?;
        let tail = Rat::new(num, den);
        let head = Rat::from_integer(whole.abs());
        let mag = head + tail;
        return Ok(if negative { -mag } else { mag });
    }
    let r = Rat::from_str(s).map_err(|_| Error::Parse(format!("bad rational {text:?}")))?;
    Ok(r)
}

/// `p/q` in lowest terms, or a bare integer.
pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// `r * scale` as an `i64`, provided the product is an integer that fits.
pub fn scaled_i64(r: &Rat, scale: &BigInt) -> Option<i64> {
    let s = r * Rat::from_integer(scale.clone());
    if !s.is_integer() {
        return None;
    }
    i64::try_from(s.to_integer()).ok()
}

pub fn is_positive(r: &Rat) -> bool {
    r.is_positive()
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}
