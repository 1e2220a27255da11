//! Exact arithmetic helpers on top of `num`'s arbitrary-precision rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn pow_rational(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

pub fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn to_i64(r: &Rational) -> Option<i64> {
    if is_integral(r) {
        r.numer().to_i64()
    } else {
        None
    }
}

pub fn floor_i64(r: &Rational) -> Option<i64> {
    r.floor().numer().to_i64()
}

pub fn ceil_i64(r: &Rational) -> Option<i64> {
    r.ceil().numer().to_i64()
}

/// Least common multiple of the denominators.
pub fn denominators_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Greatest common divisor of the numerators of integral values (zero if all zero).
pub fn numerators_gcd<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::zero(), |acc, r| acc.gcd(r.numer()))
}

/// Formats a rational as an SMT-LIB term: `3`, `(- 3)`, `(/ 1 2)` or `(- (/ 1 2))`.
pub fn to_smtlib(r: &Rational) -> String {
    let abs = r.abs();
    let body = if is_integral(&abs) {
        abs.numer().to_string()
    } else {
        format!("(/ {} {})", abs.numer(), abs.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

/// Parses a decimal (`12`, `-0.25`, `1.5e3` is not accepted) or fraction (`3/4`) literal.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (neg, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let value = match digits.split_once('.') {
        Some((whole, frac)) => {
            if whole.is_empty() && frac.is_empty() {
                return None;
            }
            if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
                return None;
            }
            let whole: BigInt = if whole.is_empty() {
                BigInt::zero()
            } else {
                whole.parse().ok()?
            };
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let frac: BigInt = if frac.is_empty() {
                BigInt::zero()
            } else {
                frac.parse().ok()?
            };
            Rational::new(whole * &scale + frac, scale)
        }
        None => {
            if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
                return None;
            }
            Rational::from_integer(digits.parse().ok()?)
        }
    };
    Some(if neg { -value } else { value })
}
