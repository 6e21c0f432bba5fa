//! Ambient curve data: a prime characteristic and a genus.
//!
//! The context never stores a curve model. Everything downstream only needs
//! p, g, and the canonical degree 2g - 2, plus the convention that a square
//! root of the canonical class (a theta characteristic) is available when a
//! construction asks for one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("genus {got} below the minimum {min} required by this construction")]
    GenusTooSmall { min: u32, got: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CurveContext {
    p: u32,
    g: u32,
}

impl CurveContext {
    pub fn new(p: u32, g: u32) -> Result<Self, ContextError> {
        if !is_prime(p) {
            return Err(ContextError::NotPrime(p));
        }
        Ok(CurveContext { p, g })
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn genus(&self) -> u32 {
        self.g
    }

    /// deg K_C = 2g - 2.
    pub fn canonical_degree(&self) -> i64 {
        2 * (self.g as i64) - 2
    }

    /// deg of a theta characteristic, g - 1.
    pub fn half_canonical_degree(&self) -> i64 {
        (self.g as i64) - 1
    }

    pub fn require_genus_at_least(&self, min: u32) -> Result<(), ContextError> {
        if self.g < min {
            return Err(ContextError::GenusTooSmall { min, got: self.g });
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for CurveContext {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            p: u32,
            g: u32,
        }
        let raw = Raw::deserialize(de)?;
        CurveContext::new(raw.p, raw.g).map_err(serde::de::Error::custom)
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_primes_rejects_composites() {
        assert!(CurveContext::new(2, 2).is_ok());
        assert!(CurveContext::new(7, 0).is_ok());
        assert_eq!(CurveContext::new(1, 2), Err(ContextError::NotPrime(1)));
        assert_eq!(CurveContext::new(6, 2), Err(ContextError::NotPrime(6)));
        assert_eq!(CurveContext::new(9, 3), Err(ContextError::NotPrime(9)));
    }

    #[test]
    fn canonical_degrees() {
        let ctx = CurveContext::new(3, 2).unwrap();
        assert_eq!(ctx.canonical_degree(), 2);
        assert_eq!(ctx.half_canonical_degree(), 1);
        let elliptic = CurveContext::new(5, 1).unwrap();
        assert_eq!(elliptic.canonical_degree(), 0);
        let rational = CurveContext::new(2, 0).unwrap();
        assert_eq!(rational.canonical_degree(), -2);
    }

    #[test]
    fn deserialization_revalidates() {
        let ok: Result<CurveContext, _> = serde_json::from_str(r#"{"p":5,"g":3}"#);
        assert_eq!(ok.unwrap(), CurveContext::new(5, 3).unwrap());
        let bad: Result<CurveContext, _> = serde_json::from_str(r#"{"p":4,"g":3}"#);
        assert!(bad.is_err());
    }
}
