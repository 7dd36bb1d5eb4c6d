//! Exact rational helpers: `"p/q"` text form, float conversion, and
//! continued-fraction rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("floating-point literal {0:?} is not allowed; write an exact \"p/q\"")]
    FloatLiteral(String),
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses `"p/q"` or a bare integer `"p"`. Decimal and exponent forms are
/// rejected so that every probability on disk is exact.
pub fn parse_rational(text: &str) -> Result<BigRational, RationalParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    if s.contains(['.', 'e', 'E']) || s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("nan")
    {
        return Err(RationalParseError::FloatLiteral(text.to_string()));
    }
    let parse_int = |part: &str| -> Result<BigInt, RationalParseError> {
        let part = part.trim();
        let digits = part.strip_prefix(['-', '+']).unwrap_or(part);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RationalParseError::Malformed(text.to_string()));
        }
        part.parse::<BigInt>()
            .map_err(|_| RationalParseError::Malformed(text.to_string()))
    };
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(s)?)),
        Some((num, den)) => {
            let num = parse_int(num)?;
            let den = parse_int(den)?;
            if den.is_zero() {
                return Err(RationalParseError::ZeroDenominator(text.to_string()));
            }
            Ok(BigRational::new(num, den))
        }
    }
}

/// Canonical `"p/q"` text; integers are still written with `/1`.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Nearest `f64`. Huge numerators and denominators are scaled down together
/// so that tiny probabilities do not collapse to `NaN`.
pub fn to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64().filter(|v| v.is_finite()) {
        return v;
    }
    let nbits = r.numer().bits() as i64;
    let dbits = r.denom().bits() as i64;
    let shift = (nbits.max(dbits) - 1000).max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// Natural logarithm of a positive rational, accurate for values far
/// outside the `f64` range.
pub fn ln_rational(r: &BigRational) -> f64 {
    fn ln_int(v: &BigInt) -> f64 {
        let bits = v.bits() as i64;
        let shift = (bits - 64).max(0) as usize;
        let top = (v >> shift).to_f64().unwrap_or(f64::NAN);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
    if !r.is_positive() {
        return f64::NEG_INFINITY;
    }
    ln_int(r.numer()) - ln_int(r.denom())
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// taken from the continued-fraction convergents and semiconvergents.
pub fn best_rational(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() || max_den == 0 {
        return None;
    }
    let negative = x < 0.0;
    let mut rem = x.abs();
    // Convergents p/q with (p_prev, q_prev) = (1, 0), (p, q) = (a0, 1).
    let (mut p_prev, mut q_prev): (u128, u128) = (1, 0);
    let a0 = rem.floor();
    if a0 > 1e30 {
        return None;
    }
    let (mut p, mut q): (u128, u128) = (a0 as u128, 1);
    rem -= a0;
    let max_den = max_den as u128;
    for _ in 0..64 {
        if rem < 1e-18 {
            break;
        }
        let inv = 1.0 / rem;
        let a = inv.floor();
        rem = inv - a;
        if a > 1e30 {
            break;
        }
        let a = a as u128;
        let q_next = a * q + q_prev;
        if q_next > max_den {
            // Largest admissible semiconvergent, kept only if it beats p/q.
            let k = (max_den - q_prev) / q;
            if k > 0 {
                let (ps, qs) = (k * p + p_prev, k * q + q_prev);
                let target = x.abs();
                let err_s = (ps as f64 / qs as f64 - target).abs();
                let err_c = (p as f64 / q as f64 - target).abs();
                if err_s < err_c {
                    p = ps;
                    q = qs;
                }
            }
            break;
        }
        let p_next = a * p + p_prev;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
    }
    let num = BigInt::from(p);
    let num = if negative { -num } else { num };
    Some(BigRational::new(num, BigInt::from(q)))
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a BigRational>,
{
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Greatest common divisor of the absolute values; zero for an empty input.
pub fn gcd_all<I: IntoIterator<Item = i64>>(values: I) -> u64 {
    values
        .into_iter()
        .fold(0u64, |acc, v| acc.gcd(&v.unsigned_abs()))
}

pub(crate) fn is_in_unit_interval(r: &BigRational) -> bool {
    !r.is_negative() && *r <= BigRational::one()
}
