//! Fraction strings for serialized output.
//!
//! Every rational that leaves the library is rendered as "num/den" in lowest
//! terms with a positive denominator, so reports are reproducible bytewise.

use num_rational::Rational64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FracError {
    #[error("malformed fraction string {0:?}, expected \"num/den\"")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Renders in lowest terms; `Rational64` keeps itself reduced.
pub fn frac_string(r: Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_frac(s: &str) -> Result<Rational64, FracError> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: i64 = num
        .trim()
        .parse()
        .map_err(|_| FracError::Malformed(s.to_string()))?;
    let den: i64 = den
        .trim()
        .parse()
        .map_err(|_| FracError::Malformed(s.to_string()))?;
    if den == 0 {
        return Err(FracError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational64::new(num, den))
}

/// Serde adapter: annotate `Rational64` fields with
/// `#[serde(with = "crate::frac")]` to get fraction strings in JSON.
pub fn serialize<S: Serializer>(r: &Rational64, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&frac_string(*r))
}

pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational64, D::Error> {
    let s = String::deserialize(de)?;
    parse_frac(&s).map_err(D::Error::custom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_lowest_terms_positive_denominator() {
        assert_eq!(frac_string(Rational64::new(4, 6)), "2/3");
        assert_eq!(frac_string(Rational64::new(3, -2)), "-3/2");
        assert_eq!(frac_string(Rational64::new(0, 5)), "0/1");
    }

    #[test]
    fn parses_and_round_trips() {
        assert_eq!(parse_frac("2/3"), Ok(Rational64::new(2, 3)));
        assert_eq!(parse_frac("-7/2"), Ok(Rational64::new(-7, 2)));
        assert_eq!(parse_frac("5"), Ok(Rational64::from_integer(5)));
        assert_eq!(parse_frac("4/6"), Ok(Rational64::new(2, 3)));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_frac("a/b"), Err(FracError::Malformed(_))));
        assert!(matches!(
            parse_frac("1/0"),
            Err(FracError::ZeroDenominator(_))
        ));
        assert!(matches!(parse_frac(""), Err(FracError::Malformed(_))));
    }
}
