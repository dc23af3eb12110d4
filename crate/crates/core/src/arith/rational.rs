//! Exact scalars.
//!
//! [`Rational`] is `num_rational::BigRational`, which keeps every value
//! reduced with a positive denominator after each operation. The helpers
//! here cover parsing, canonical text output, decimal rendering and the
//! dyadic rounding grid used by value iteration.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty number")]
    Empty,
    #[error("invalid number `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn parse_bigint(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses `num/den` or an integer. Decimal points and exponents are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, RationalParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let invalid = || RationalParseError::Invalid(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_bigint(n).ok_or_else(invalid)?;
            // the denominator carries no sign of its own
            if d.starts_with(['-', '+']) {
                return Err(invalid());
            }
            let d = parse_bigint(d).ok_or_else(invalid)?;
            if d.is_zero() {
                return Err(RationalParseError::ZeroDenominator(s.to_string()));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(parse_bigint(s).ok_or_else(invalid)?)),
    }
}

/// Parses a tolerance-style literal: anything [`parse_rational`] accepts, plus
/// decimal notation such as `0.001` or `1e-9`, converted exactly.
pub fn parse_decimal(s: &str) -> Result<Rational, RationalParseError> {
    let s = s.trim();
    if let Ok(r) = parse_rational(s) {
        return Ok(r);
    }
    let invalid = || RationalParseError::Invalid(s.to_string());
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| invalid())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(invalid());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(invalid());
    }
    let digits: BigInt = format!("{whole}{frac}0").parse().map_err(|_| invalid())?;
    let scale = exp - frac.len() as i32 - 1;
    let mut value = Rational::from_integer(digits);
    if scale >= 0 {
        value *= pow10(scale as u32);
    } else {
        value /= pow10((-scale) as u32);
    }
    Ok(if neg { -value } else { value })
}

pub fn pow10(k: u32) -> Rational {
    Rational::from_integer(num_traits::pow(BigInt::from(10), k as usize))
}

pub fn pow2(k: u32) -> BigInt {
    BigInt::one() << k as usize
}

/// Canonical text form: `num/den`, or just `num` when the denominator is 1.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rounds to the nearest multiple of `10^-digits`, ties away from zero.
pub fn round_decimal(r: &Rational, digits: u32) -> Rational {
    let scale = pow10(digits);
    let scaled = r * &scale;
    scaled.round() / scale
}

/// Decimal rendering with exactly `digits` places after the point.
pub fn to_decimal_string(r: &Rational, digits: u32) -> String {
    let scaled = (r * pow10(digits)).round().to_integer();
    let neg = scaled.sign() == Sign::Minus;
    let mut s = scaled.abs().to_string();
    if digits > 0 {
        let d = digits as usize;
        if s.len() <= d {
            s = format!("{}{}", "0".repeat(d + 1 - s.len()), s);
        }
        s.insert(s.len() - d, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

/// Nearest point of the grid `2^-bits * Z`.
pub fn round_to_grid(r: &Rational, bits: u32) -> Rational {
    let scale = Rational::from_integer(pow2(bits));
    (r * &scale).round() / scale
}

/// Smallest `d` with `10^-d <= eps` (for `eps > 0`).
pub fn digits_for(eps: &Rational) -> u32 {
    let mut d = 0u32;
    let mut unit = Rational::one();
    while &unit > eps {
        unit /= int(10);
        d += 1;
    }
    d
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // fall back on a scaled quotient when the parts overflow f64
        let bits = r.numer().bits().max(r.denom().bits()) as i64 - 60;
        if bits <= 0 {
            return f64::NAN;
        }
        let shift = bits as usize;
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Sup-norm of `a - b`.
pub fn sup_dist(a: &[Rational], b: &[Rational]) -> Rational {
    assert_eq!(a.len(), b.len(), "sup_dist: length mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Canonical-form check used by debug assertions.
pub fn is_canonical(r: &Rational) -> bool {
    r.denom().is_positive() && r.numer().gcd(r.denom()).is_one()
        || (r.numer().is_zero() && r.denom().is_one())
}
