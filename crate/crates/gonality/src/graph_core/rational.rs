//! Exact rational numbers and parsing helpers.
//!
//! All lengths, offsets and distances in the crate are `BigRational`s kept in
//! lowest terms by the backing library. Decimal notation is deliberately not
//! accepted anywhere: inputs are integers or `p/q`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

/// Shorthand constructor from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `p/q` or an integer literal. Rejects decimals and empty input.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational".into());
    }
    if s.contains('.') {
        return Err(format!("decimal notation not accepted: {s}"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {s}"))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {s}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s}"));
        }
        Ok(Rational::new(num, den))
    } else {
        let num: BigInt = s.parse().map_err(|_| format!("bad integer {s}"))?;
        Ok(Rational::from_integer(num))
    }
}

/// Displays as `p/q`, or just `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Least common multiple of the denominators of the given rationals.
pub fn common_denominator<'a>(xs: impl Iterator<Item = &'a Rational>) -> BigInt {
    let mut acc = BigInt::one();
    for x in xs {
        acc = num_integer::lcm(acc, x.denom().abs());
    }
    acc
}
