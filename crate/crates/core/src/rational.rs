//! Exact rational helpers shared by every module.
//!
//! `Rational` is `num_rational::BigRational`. Across process boundaries a
//! rational is always written as the string `"p/q"` (with `q >= 1`), and
//! parsing accepts either `"p/q"` or a bare integer `"p"`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a rational (expected \"p/q\")")]
pub struct ParseRationalError {
    pub input: String,
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn parse(input: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: input.to_string(),
    };
    let trimmed = input.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// `"p/q"` in lowest terms; integers are written `"p/1"`.
pub fn format(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Wrapper whose `Display` is the `"p/q"` wire form.
pub struct Pq<'a>(pub &'a Rational);

impl fmt::Display for Pq<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer `>= value`.
pub fn ceil(value: &Rational) -> BigInt {
    value.ceil().to_integer()
}

/// Fractional part in `[0, 1)`.
pub fn frac(value: &Rational) -> Rational {
    value - value.floor()
}

/// Exact power with a non-negative exponent.
pub fn pow(base: &Rational, exp: u64) -> Rational {
    let mut result = Rational::one();
    let mut square = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= &square;
        }
        e >>= 1;
        if e > 0 {
            square = &square * &square;
        }
    }
    result
}

/// A rational `r <= base^exp` for `0 <= base <= 1`, computed by repeated
/// squaring with every intermediate rounded down to a multiple of
/// `2^-precision_bits`. Exact (and equal to `base^exp`) for small exponents.
pub fn pow_lower_bound(base: &Rational, exp: u64, precision_bits: u64) -> Rational {
    debug_assert!(!base.is_negative() && base <= &Rational::one());
    let scale = BigInt::one() << precision_bits;
    let round_down = |q: Rational| -> Rational {
        let floored = (q.numer() * &scale).div_floor(q.denom());
        Rational::new(floored, scale.clone())
    };
    let mut result = Rational::one();
    let mut square = round_down(base.clone());
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = round_down(&result * &square);
        }
        e >>= 1;
        if e > 0 {
            square = round_down(&square * &square);
        }
    }
    result
}

pub mod serde_pq {
    //! `#[serde(with = "serde_pq")]` for `Rational` fields.
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse(&raw).map_err(serde::de::Error::custom)
    }
}

pub mod serde_pq_opt {
    //! Optional rationals; `None` is JSON `null`.
    use super::*;

    pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_str(&format(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        raw.map(|r| parse(&r).map_err(serde::de::Error::custom))
            .transpose()
    }
}
