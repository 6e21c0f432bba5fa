//! Line classes and direct sums of them.
//!
//! A `LineClass` is a formal line bundle: an integer power of a fixed theta
//! characteristic K^(1/2), an optional unlabeled degree shift, and a product
//! of named twist factors, each carrying its own degree and an optional
//! torsion order. Tensor products work on exponents, so exact cancellation
//! (L tensor L = O for 2-torsion L) is decidable. Degrees are exact
//! rationals throughout; half-integers only ever arise from odd powers of
//! K^(1/2) and from formal twists used inside rank computations.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::CurveContext;
use crate::frac::frac_string;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SheafError {
    #[error("twist label {0:?} reused with a different degree or torsion order")]
    LabelClash(String),
    #[error("torsion order {0} must be at least 2")]
    BadTorsionOrder(u32),
    #[error("a bundle sum needs at least one summand")]
    EmptySum,
    #[error("operands live over different curve contexts")]
    ContextMismatch,
    #[error("Euler characteristic {0} is not an integer")]
    FractionalChi(String),
    #[error("h0 = {h0} is smaller than the Euler characteristic {chi}")]
    DualH0Negative { h0: i64, chi: i64 },
}

/// One named multiplicative factor of a line class.
#[derive(Debug, Clone, PartialEq, Eq)]
struct TwistFactor {
    power: i64,
    unit_degree: Rational64,
    torsion: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LineClass {
    /// Exponent of K^(1/2): kc_halves = 2 is the canonical class itself.
    kc_halves: i64,
    plain_degree: Rational64,
    factors: BTreeMap<String, TwistFactor>,
}

impl LineClass {
    /// The structure sheaf O.
    pub fn structure() -> Self {
        LineClass::default()
    }

    /// K^(n/2).
    pub fn half_canonical_power(n: i64) -> Self {
        LineClass {
            kc_halves: n,
            ..LineClass::default()
        }
    }

    /// K^n.
    pub fn canonical_power(n: i64) -> Self {
        Self::half_canonical_power(2 * n)
    }

    /// Unlabeled line of the given degree.
    pub fn of_degree<D: Into<Rational64>>(d: D) -> Self {
        LineClass {
            plain_degree: d.into(),
            ..LineClass::default()
        }
    }

    /// Named line of the given degree, e.g. an auxiliary divisor class.
    pub fn twist<D: Into<Rational64>>(label: &str, degree: D) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(
            label.to_string(),
            TwistFactor {
                power: 1,
                unit_degree: degree.into(),
                torsion: None,
            },
        );
        LineClass {
            kc_halves: 0,
            plain_degree: Rational64::zero(),
            factors,
        }
    }

    /// Named degree-zero line of finite order in the Picard group.
    pub fn torsion(label: &str, order: u32) -> Result<Self, SheafError> {
        if order < 2 {
            return Err(SheafError::BadTorsionOrder(order));
        }
        let mut factors = BTreeMap::new();
        factors.insert(
            label.to_string(),
            TwistFactor {
                power: 1,
                unit_degree: Rational64::zero(),
                torsion: Some(order),
            },
        );
        Ok(LineClass {
            kc_halves: 0,
            plain_degree: Rational64::zero(),
            factors,
        })
    }

    pub fn kc_halves(&self) -> i64 {
        self.kc_halves
    }

    /// Degree of everything except the K^(1/2) part; context independent.
    pub fn twist_degree(&self) -> Rational64 {
        let mut d = self.plain_degree;
        for f in self.factors.values() {
            d += f.unit_degree * Rational64::from_integer(f.power);
        }
        d
    }

    pub fn degree(&self, ctx: &CurveContext) -> Rational64 {
        Rational64::from_integer(self.kc_halves * ctx.half_canonical_degree()) + self.twist_degree()
    }

    pub fn is_trivial(&self) -> bool {
        self.kc_halves == 0 && self.plain_degree.is_zero() && self.factors.is_empty()
    }

    pub fn tensor(&self, other: &LineClass) -> Result<LineClass, SheafError> {
        let mut factors = self.factors.clone();
        for (label, f) in &other.factors {
            match factors.get_mut(label) {
                None => {
                    factors.insert(label.clone(), f.clone());
                }
                Some(mine) => {
                    if mine.unit_degree != f.unit_degree || mine.torsion != f.torsion {
                        return Err(SheafError::LabelClash(label.clone()));
                    }
                    mine.power += f.power;
                }
            }
        }
        Ok(LineClass {
            kc_halves: self.kc_halves + other.kc_halves,
            plain_degree: self.plain_degree + other.plain_degree,
            factors,
        }
        .normalized())
    }

    /// n-th tensor power; n may be negative (dual powers).
    pub fn tensor_power(&self, n: i64) -> LineClass {
        let mut factors = self.factors.clone();
        for f in factors.values_mut() {
            f.power *= n;
        }
        LineClass {
            kc_halves: self.kc_halves * n,
            plain_degree: self.plain_degree * Rational64::from_integer(n),
            factors,
        }
        .normalized()
    }

    /// Torsion exponents are reduced and dead factors dropped, so structural
    /// equality agrees with equality in the Picard model.
    fn normalized(mut self) -> Self {
        self.factors.retain(|_, f| {
            if let Some(t) = f.torsion {
                f.power = f.power.rem_euclid(t as i64);
            }
            f.power != 0
        });
        self
    }

    /// Human-readable form, e.g. "K^(1/2)*A*L^2" or "O".
    pub fn label(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        match self.kc_halves {
            0 => {}
            2 => parts.push("K".to_string()),
            n if n % 2 == 0 => parts.push(format!("K^{}", n / 2)),
            n => parts.push(format!("K^({}/2)", n)),
        }
        if !self.plain_degree.is_zero() {
            parts.push(format!("O({})", frac_string(self.plain_degree)));
        }
        for (label, f) in &self.factors {
            if f.power == 1 {
                parts.push(label.clone());
            } else {
                parts.push(format!("{}^{}", label, f.power));
            }
        }
        if parts.is_empty() {
            "O".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Effective torsion order when the class is a single pure torsion
    /// factor, else None.
    fn pure_torsion_order(&self) -> Option<u32> {
        if self.kc_halves != 0 || !self.plain_degree.is_zero() || self.factors.len() != 1 {
            return None;
        }
        let f = self.factors.values().next().unwrap();
        let t = f.torsion?;
        let g = gcd_u64(f.power.unsigned_abs(), t as u64) as u32;
        Some(t / g)
    }

    /// Label of the named factors only; unlabeled degree shifts are carried
    /// by the serialized degree field.
    fn twist_label(&self) -> String {
        let named = LineClass {
            kc_halves: 0,
            plain_degree: Rational64::zero(),
            factors: self.factors.clone(),
        };
        if named.is_trivial() {
            String::new()
        } else {
            named.label()
        }
    }
}

impl fmt::Display for LineClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl Serialize for LineClass {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Twist {
            label: String,
            degree: String,
        }
        let mut s = ser.serialize_struct("LineClass", 3)?;
        s.serialize_field("kc_halves", &self.kc_halves)?;
        s.serialize_field(
            "twist",
            &Twist {
                label: self.twist_label(),
                degree: frac_string(self.twist_degree()),
            },
        )?;
        s.serialize_field("torsion", &self.pure_torsion_order())?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for LineClass {
    /// Inverse of `Serialize` on simple classes (no composite twist labels);
    /// composite labels come back as a single named factor.
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Twist {
            label: String,
            degree: String,
        }
        #[derive(Deserialize)]
        struct Raw {
            kc_halves: i64,
            twist: Twist,
            #[serde(default)]
            torsion: Option<u32>,
        }
        let raw = Raw::deserialize(de)?;
        let degree =
            crate::frac::parse_frac(&raw.twist.degree).map_err(serde::de::Error::custom)?;
        let base = LineClass::half_canonical_power(raw.kc_halves);
        let rest = if let Some(order) = raw.torsion {
            LineClass::torsion(&raw.twist.label, order).map_err(serde::de::Error::custom)?
        } else if raw.twist.label.is_empty() {
            LineClass::of_degree(degree)
        } else {
            LineClass::twist(&raw.twist.label, degree)
        };
        base.tensor(&rest).map_err(serde::de::Error::custom)
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// Direct sum of line classes over a fixed context. Summands are positional:
/// index order is part of the data and is preserved by every operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BundleSum {
    context: CurveContext,
    summands: Vec<LineClass>,
}

/// Rank, degree, slope of a sum; degrees stay exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BundleStats {
    pub rank: usize,
    #[serde(with = "crate::frac")]
    pub degree: Rational64,
    #[serde(with = "crate::frac")]
    pub slope: Rational64,
}

impl<'de> Deserialize<'de> for BundleSum {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            context: CurveContext,
            summands: Vec<LineClass>,
        }
        let raw = Raw::deserialize(de)?;
        BundleSum::new(raw.context, raw.summands).map_err(serde::de::Error::custom)
    }
}

impl BundleSum {
    pub fn new(context: CurveContext, summands: Vec<LineClass>) -> Result<Self, SheafError> {
        if summands.is_empty() {
            return Err(SheafError::EmptySum);
        }
        Ok(BundleSum { context, summands })
    }

    pub fn line(context: CurveContext, class: LineClass) -> Self {
        BundleSum {
            context,
            summands: vec![class],
        }
    }

    pub fn context(&self) -> &CurveContext {
        &self.context
    }

    pub fn summands(&self) -> &[LineClass] {
        &self.summands
    }

    pub fn rank(&self) -> usize {
        self.summands.len()
    }

    pub fn degree(&self) -> Rational64 {
        self.summands.iter().map(|l| l.degree(&self.context)).sum()
    }

    pub fn slope(&self) -> Rational64 {
        self.degree() / Rational64::from_integer(self.rank() as i64)
    }

    pub fn stats(&self) -> BundleStats {
        BundleStats {
            rank: self.rank(),
            degree: self.degree(),
            slope: self.slope(),
        }
    }

    pub fn summand_degree(&self, i: usize) -> Rational64 {
        self.summands[i].degree(&self.context)
    }

    pub fn tensor_line(&self, l: &LineClass) -> Result<BundleSum, SheafError> {
        let summands = self
            .summands
            .iter()
            .map(|s| s.tensor(l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BundleSum {
            context: self.context,
            summands,
        })
    }

    pub fn direct_sum(&self, other: &BundleSum) -> Result<BundleSum, SheafError> {
        if self.context != other.context {
            return Err(SheafError::ContextMismatch);
        }
        let mut summands = self.summands.clone();
        summands.extend(other.summands.iter().cloned());
        Ok(BundleSum {
            context: self.context,
            summands,
        })
    }

    /// Row-major product: summand (i, j) of self tensor other lands at index
    /// i * other.rank() + j.
    pub fn tensor(&self, other: &BundleSum) -> Result<BundleSum, SheafError> {
        if self.context != other.context {
            return Err(SheafError::ContextMismatch);
        }
        let mut summands = Vec::with_capacity(self.rank() * other.rank());
        for a in &self.summands {
            for b in &other.summands {
                summands.push(a.tensor(b)?);
            }
        }
        Ok(BundleSum {
            context: self.context,
            summands,
        })
    }
}

/// chi(E) = deg E + rank(E)(1 - g) on a curve of genus g.
pub fn euler_characteristic(ctx: &CurveContext, rank: usize, degree: Rational64) -> Rational64 {
    degree + Rational64::from_integer(rank as i64 * (1 - ctx.genus() as i64))
}

/// h1 = h0 - chi, via duality; rejects fractional chi and h0 < chi.
pub fn serre_dual_h0(
    ctx: &CurveContext,
    rank: usize,
    degree: Rational64,
    h0: i64,
) -> Result<i64, SheafError> {
    let chi = euler_characteristic(ctx, rank, degree);
    if !chi.is_integer() {
        return Err(SheafError::FractionalChi(frac_string(chi)));
    }
    let chi = chi.to_integer();
    if h0 < chi {
        return Err(SheafError::DualH0Negative { h0, chi });
    }
    Ok(h0 - chi)
}

/// One slope level of the Harder-Narasimhan grouping of a sum of lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HnGroup {
    #[serde(with = "crate::frac")]
    pub slope: Rational64,
    pub indices: Vec<usize>,
}

/// Summands grouped by degree, slopes strictly decreasing. For a sum of
/// lines this is exactly the Harder-Narasimhan filtration's graded pieces.
pub fn hn_grouping(b: &BundleSum) -> Vec<HnGroup> {
    let mut order: Vec<usize> = (0..b.rank()).collect();
    order.sort_by(|&i, &j| {
        b.summand_degree(j)
            .cmp(&b.summand_degree(i))
            .then(i.cmp(&j))
    });
    let mut groups: Vec<HnGroup> = Vec::new();
    for i in order {
        let d = b.summand_degree(i);
        match groups.last_mut() {
            Some(g) if g.slope == d => g.indices.push(i),
            _ => groups.push(HnGroup {
                slope: d,
                indices: vec![i],
            }),
        }
    }
    groups
}
