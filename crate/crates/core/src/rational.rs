//! Helpers for exact rationals: parsing, printing and bounded-denominator rounding.

use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed rational literal `{0}`")]
pub struct ParseRationalError(pub String);

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `n`, `n/d`, `n//d`, decimals (`0.125`) and scientific notation
/// (`1e-3`, `2.5E+2`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once("//").or_else(|| s.split_once('/')) {
        let num = parse_decimal(num.trim()).ok_or_else(err)?;
        let den = parse_decimal(den.trim()).ok_or_else(err)?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(err)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], i64::from_str(&body[pos + 1..]).ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(&digits).ok()?);
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

/// `num/den` in lowest terms; the denominator is always printed.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `num` for integers, `num/den` otherwise.
pub fn format_compact(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format_ratio(r)
    }
}

/// Exact value of a finite binary64 number.
pub fn from_f64_exact(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Number of decimal digits in the larger of numerator and denominator.
pub fn decimal_digits(r: &Rational) -> usize {
    let digits = |n: &BigInt| n.magnitude().to_str_radix(10).len();
    digits(r.numer()).max(digits(r.denom()))
}

/// Smallest rational `>= x` whose denominator does not exceed `max_den`.
///
/// Walks the Stern–Brocot tree between the two integer neighbours of `x`,
/// taking runs of equal-direction steps at once, so the cost is logarithmic
/// in `max_den`.
pub fn ceil_bounded(x: &Rational, max_den: &BigInt) -> Rational {
    assert!(max_den >= &BigInt::one(), "denominator bound must be positive");
    if x.denom() <= max_den {
        return x.clone();
    }
    let (p, q) = (x.numer().clone(), x.denom().clone());
    // lower = a/b < x < c/d = upper, with b*c - a*d = 1
    let mut a = p.div_floor(&q);
    let mut b = BigInt::one();
    let mut c = &a + 1;
    let mut d = BigInt::one();
    loop {
        if &b + &d > *max_den {
            return Rational::new(c, d);
        }
        // distances of the bounds from x, scaled by q: both strictly positive
        let below = &p * &b - &a * &q;
        let above = &c * &q - &p * &d;
        let mediant_below = (&a + &c) * &q < &p * (&b + &d);
        if mediant_below {
            // raise the lower bound: largest k with (a + k c)/(b + k d) < x
            let k_val = (&below - BigInt::one()).div_floor(&above);
            let k_den = (max_den - &b).div_floor(&d);
            let k = k_val.min(k_den);
            debug_assert!(k.sign() == Sign::Plus);
            a += &k * &c;
            b += &k * &d;
        } else {
            // lower the upper bound: largest k with (c + k a)/(d + k b) > x
            let k_val = (&above - BigInt::one()).div_floor(&below);
            let k_den = (max_den - &d).div_floor(&b);
            let k = k_val.min(k_den);
            debug_assert!(k.sign() == Sign::Plus);
            c += &k * &a;
            d += &k * &b;
        }
    }
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}
