//! Exact rationals and DoF vectors.
//!
//! Rationals travel as `"p/q"` strings in every document; whole numbers are
//! written without a denominator (`"2"`, `"0"`).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let trimmed = text.trim();
    let bad = || Error::InvalidRational(text.to_string());
    let (numer, denom) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let numer = BigInt::from_str(numer).map_err(|_| bad())?;
    let denom = BigInt::from_str(denom).map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub(crate) mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }
}

pub(crate) mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let texts: Vec<String> = values.iter().map(format_rational).collect();
        texts.serialize(s)
    }
}

/// A DoF vector `(d_1, ..., d_K)` with nonnegative exact components.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DofPoint(Vec<Rational>);

impl DofPoint {
    pub fn new(components: Vec<Rational>) -> Result<Self> {
        if let Some(pos) = components.iter().position(|c| c.is_negative()) {
            return Err(Error::NegativeComponent { index: pos + 1 });
        }
        Ok(DofPoint(components))
    }

    pub fn zeros(k: usize) -> Self {
        DofPoint(vec![Rational::zero(); k])
    }

    /// Every component equal to `value`.
    pub fn uniform(k: usize, value: Rational) -> Result<Self> {
        DofPoint::new(vec![value; k])
    }

    /// `scale * e_index`, with `index` 1-based.
    pub fn axis(k: usize, index: usize, scale: Rational) -> Result<Self> {
        let mut components = vec![Rational::zero(); k];
        components[index - 1] = scale;
        DofPoint::new(components)
    }

    /// Parses a comma-separated list such as `"1/3,1/3,1/3,1/3"`.
    pub fn parse(text: &str) -> Result<Self> {
        let components = text
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        DofPoint::new(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Rational] {
        &self.0
    }

    /// Component for message `k` (1-based).
    pub fn get(&self, k: usize) -> &Rational {
        &self.0[k - 1]
    }

    pub fn sum(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, c| acc + c)
    }
}

impl fmt::Display for DofPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let texts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", texts.join(", "))
    }
}

impl FromStr for DofPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DofPoint::parse(s)
    }
}

impl Serialize for DofPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_rational_vec::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for DofPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        let components = texts
            .iter()
            .map(|t| parse_rational(t))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        DofPoint::new(components).map_err(serde::de::Error::custom)
    }
}
