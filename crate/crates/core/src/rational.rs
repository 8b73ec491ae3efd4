//! Exact rational numbers and their JSON representation.
//!
//! Integral values are written as JSON numbers; everything else is written as
//! a `"p/q"` string. On input, integers, `"p/q"` strings and decimal strings
//! (`"0.25"`) are read exactly. Non-integral JSON numbers are accepted but read
//! through the closest small-denominator rational, so prefer strings for them.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

pub type Rational = Rational64;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
        let den: i64 = den.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
        if den == 0 {
            return Err(format!("zero denominator in {text:?}"));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        let digits = frac.len() as u32;
        if digits > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("unsupported decimal {text:?}"));
        }
        let scale = 10i64.pow(digits);
        let whole_val: i64 = if whole_abs.is_empty() {
            0
        } else {
            whole_abs.parse().map_err(|_| format!("bad number {text:?}"))?
        };
        let frac_val: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| format!("bad number {text:?}"))? };
        let magnitude = Rational::new(whole_val * scale + frac_val, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    text.parse::<i64>().map(int).map_err(|_| format!("bad number {text:?}"))
}

pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Lossy conversion for reporting only (CSV, timings); never used in checks.
pub fn to_f64(value: &Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i64 {
    values.into_iter().fold(1i64, |acc, v| acc.lcm(v.denom()))
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}

pub fn is_zero(value: &Rational) -> bool {
    value.is_zero()
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer, a \"p/q\" string or a decimal string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        i64::try_from(v).map(int).map_err(|_| E::custom("integer out of range"))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite number"));
        }
        if v.fract() == 0.0 && v.abs() < 9.0e15 {
            return Ok(int(v as i64));
        }
        Rational::approximate_float(v).ok_or_else(|| E::custom("number not representable"))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        parse_rational(v).map_err(E::custom)
    }
}

pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
    if value.is_integer() {
        serializer.serialize_i64(*value.numer())
    } else {
        serializer.serialize_str(&format_rational(value))
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
    deserializer.deserialize_any(RationalVisitor)
}

/// Serde adapter for `Option<Rational>`.
pub mod option {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super")] Rational);

    pub fn serialize<S: Serializer>(value: &Option<Rational>, serializer: S) -> Result<S::Ok, S::Error> {
        value.map(Wrap).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<Rational>, D::Error> {
        Ok(Option::<Wrap>::deserialize(deserializer)?.map(|w| w.0))
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod vec {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super")] Rational);

    pub fn serialize<S: Serializer>(values: &[Rational], serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(values.iter().map(|v| Wrap(*v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<Rational>, D::Error> {
        Ok(Vec::<Wrap>::deserialize(deserializer)?.into_iter().map(|w| w.0).collect())
    }
}

/// A rational that serializes through the module's JSON convention; handy
/// inside tuples and maps where `#[serde(with)]` cannot reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JsonRational(pub Rational);

impl serde::Serialize for JsonRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serialize(&self.0, serializer)
    }
}

impl<'de> serde::Deserialize<'de> for JsonRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserialize(deserializer).map(JsonRational)
    }
}
