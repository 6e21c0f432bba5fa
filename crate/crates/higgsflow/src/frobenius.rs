//! Frobenius pullback and pushforward bookkeeping.
//!
//! Pullback is computable on our formal classes: it raises every line to
//! its p-th power. Pushforwards of lines are opaque rank-p bundles; what we
//! track is their degree ledger, the canonical filtration of their
//! pullback, and the classical stability facts that come with them
//! (recorded as named rules, not recomputed).

use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

use crate::curve::{ContextError, CurveContext};
use crate::frac::frac_string;
use crate::higgs::GradedHiggsBundle;
use crate::sheaf::{hn_grouping, BundleSum, LineClass, SheafError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrobeniusError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error("pullback of a nonzero Higgs field is not defined here")]
    NonzeroField,
    #[error("degree {degree} is not divisible by p = {p} in the integers")]
    NotDivisible { degree: String, p: u32 },
    #[error("subsheaf rank {rank} must lie in 1..={p}")]
    RankOutOfRange { rank: usize, p: u32 },
}

/// F^* on a line class is the p-th tensor power.
pub fn pullback_line(ctx: &CurveContext, l: &LineClass) -> LineClass {
    l.tensor_power(ctx.prime() as i64)
}

/// F^* summand by summand; degree multiplies by p.
pub fn pullback_bundle(b: &BundleSum) -> BundleSum {
    let ctx = *b.context();
    let summands = b
        .summands()
        .iter()
        .map(|l| pullback_line(&ctx, l))
        .collect();
    BundleSum::new(ctx, summands).expect("rank preserved")
}

/// How the underlying bundle of a named opaque object is known to behave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityFlag {
    Stable,
    Semistable,
}

/// F_* of a line class: rank p, degree by Riemann-Roch, stable for g >= 2
/// and semistable for g = 1 by Sun's theorem. The bundle itself stays
/// opaque; only the ledger is represented.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PushforwardBundle {
    context: CurveContext,
    source: LineClass,
}

impl PushforwardBundle {
    pub fn new(ctx: CurveContext, source: LineClass) -> Result<Self, FrobeniusError> {
        ctx.require_genus_at_least(1)?;
        Ok(PushforwardBundle {
            context: ctx,
            source,
        })
    }

    pub fn context(&self) -> &CurveContext {
        &self.context
    }

    pub fn source(&self) -> &LineClass {
        &self.source
    }

    pub fn rank(&self) -> usize {
        self.context.prime() as usize
    }

    /// deg F_* L = deg L + (p - 1)(g - 1).
    pub fn degree(&self) -> Rational64 {
        self.source.degree(&self.context)
            + Rational64::from_integer(
                (self.context.prime() as i64 - 1) * self.context.half_canonical_degree(),
            )
    }

    pub fn slope(&self) -> Rational64 {
        self.degree() / Rational64::from_integer(self.rank() as i64)
    }

    /// Sun: F_* of a line is stable for g >= 2, semistable for g = 1.
    pub fn stability(&self) -> StabilityFlag {
        if self.context.genus() >= 2 {
            StabilityFlag::Stable
        } else {
            StabilityFlag::Semistable
        }
    }

    pub fn stability_citation(&self) -> &'static str {
        "Sun: stability of Frobenius pushforwards of line bundles"
    }
}

/// Graded of the canonical filtration of F^* F_* L: the chain
/// L K^(p-1) -> ... -> L K -> L with every arrow an isomorphism.
/// Exponent p - 1; total degree p deg F_* L.
pub fn canonical_graded(
    ctx: CurveContext,
    source: &LineClass,
) -> Result<GradedHiggsBundle, FrobeniusError> {
    ctx.require_genus_at_least(1)?;
    let p = ctx.prime() as i64;
    let mut summands = Vec::with_capacity(p as usize);
    for i in (0..p).rev() {
        summands.push(source.tensor(&LineClass::canonical_power(i))?);
    }
    let base = BundleSum::new(ctx, summands)?;
    Ok(GradedHiggsBundle::chain(base))
}

/// Comparison of the slope grouping of the canonical graded with the chain
/// order. For g >= 2 the groups are exactly the chain summands in order:
/// the canonical filtration is the Harder-Narasimhan filtration of the
/// pullback. For g = 1 all degrees coincide and the grouping collapses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalHnComparison {
    pub group_sizes: Vec<usize>,
    pub matches_chain_order: bool,
}

pub fn canonical_vs_hn(
    ctx: CurveContext,
    source: &LineClass,
) -> Result<CanonicalHnComparison, FrobeniusError> {
    let graded = canonical_graded(ctx, source)?;
    let groups = hn_grouping(graded.base());
    let matches = groups.len() == graded.rank()
        && groups.iter().enumerate().all(|(i, g)| g.indices == vec![i]);
    Ok(CanonicalHnComparison {
        group_sizes: groups.iter().map(|g| g.indices.len()).collect(),
        matches_chain_order: matches,
    })
}

/// Sun's slope gap: a proper subsheaf of F_* L of rank r satisfies
/// mu(sub) - mu(F_* L) <= -(p - r)(g - 1) / p.
pub fn sun_slope_gap(ctx: &CurveContext, sub_rank: usize) -> Result<Rational64, FrobeniusError> {
    ctx.require_genus_at_least(1)?;
    let p = ctx.prime() as usize;
    if sub_rank == 0 || sub_rank > p {
        return Err(FrobeniusError::RankOutOfRange {
            rank: sub_rank,
            p: ctx.prime(),
        });
    }
    Ok(Rational64::new(
        -((p - sub_rank) as i64) * ctx.half_canonical_degree(),
        p as i64,
    ))
}

/// Checks a candidate subsheaf slope against the gap bound.
pub fn satisfies_sun_gap(
    push: &PushforwardBundle,
    sub_rank: usize,
    sub_slope: Rational64,
) -> Result<bool, FrobeniusError> {
    let gap = sun_slope_gap(push.context(), sub_rank)?;
    Ok(sub_slope - push.slope() <= gap)
}

/// Degree of a descent along Frobenius: an integer divisible by p maps to
/// its quotient; anything else cannot descend.
pub fn cartier_descent_degree(
    ctx: &CurveContext,
    degree: Rational64,
) -> Result<Rational64, FrobeniusError> {
    let p = ctx.prime() as i64;
    if !degree.is_integer() || degree.numer() % p != 0 {
        return Err(FrobeniusError::NotDivisible {
            degree: frac_string(degree),
            p: ctx.prime(),
        });
    }
    Ok(degree / Rational64::from_integer(p))
}
