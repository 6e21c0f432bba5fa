//! Named constructions that exhibit the limits of the flow.
//!
//! The central family is a flat bundle of rank p + 1 whose only
//! gr-semistable regrading is a stable chain of nilpotency exponent p, one
//! past the inverse Cartier bound. Its Cartier transform is therefore a
//! semistable Higgs term on which the flow blocks at the first step. Direct
//! sums with matching-slope lines push the phenomenon to every larger rank,
//! and a tensor product of two strongly semistable terms reproduces it in
//! rank 2p, so neither property survives sums or products.
//!
//! Every construction returns claims: computed facts carry the exact
//! values, quoted facts carry their classical source.

use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

use crate::curve::{ContextError, CurveContext};
use crate::flow::{
    inverse_cartier, Assumptions, FlatObject, FlowError, HiggsObject, OpaqueHiggs, OpaqueSource,
    Provenance, FLOW_TORSION_LABEL,
};
use crate::frac::frac_string;
use crate::frobenius::{cartier_descent_degree, FrobeniusError, PushforwardBundle, StabilityFlag};
use crate::higgs::{sym_uniformizing, GradedHiggsBundle, HiggsError};
use crate::report::Claim;
use crate::sheaf::{serre_dual_h0, BundleSum, LineClass, SheafError};

#[derive(Debug, Error, PartialEq)]
pub enum ConstructionError {
    #[error("ell = {ell} outside 1..={max}")]
    EllOutOfRange { ell: i64, max: i64 },
    #[error("rank {rank} below the minimum {min} for this construction")]
    RankTooSmall { rank: usize, min: usize },
    #[error("this construction is proved on a general curve; pass the genericity assumption")]
    GenericityRequired,
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Higgs(#[from] HiggsError),
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Parameters of the blocking family: prime, genus, the twist degree ell,
/// and the auxiliary line degree d_l forced by the divisibility congruence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockingParams {
    pub p: u32,
    pub g: u32,
    pub ell: i64,
    pub d_l: i64,
}

impl BlockingParams {
    /// Valid for g >= 2 and 1 <= ell <= 2g - 2. d_l is the least
    /// nonnegative residue of 2g - 2 - ell mod p, which makes the total
    /// degree divisible by p.
    pub fn new(ctx: &CurveContext, ell: i64) -> Result<Self, ConstructionError> {
        ctx.require_genus_at_least(2)?;
        let max = ctx.canonical_degree();
        if ell < 1 || ell > max {
            return Err(ConstructionError::EllOutOfRange { ell, max });
        }
        let p = ctx.prime() as i64;
        Ok(BlockingParams {
            p: ctx.prime(),
            g: ctx.genus(),
            ell,
            d_l: (max - ell).rem_euclid(p),
        })
    }

    pub fn rank(&self) -> usize {
        self.p as usize + 1
    }

    /// ell + (p + 1) d_l + (p + 2)(p - 1)(g - 1).
    pub fn flat_degree(&self) -> i64 {
        let (p, g) = (self.p as i64, self.g as i64);
        self.ell + (p + 1) * self.d_l + (p + 2) * (p - 1) * (g - 1)
    }
}

/// The stable chain the blocking flat regrades to:
/// A L K^(p-1) -> L K^(p-1) -> L K^(p-2) -> ... -> L,
/// with deg A = ell, deg L = d_l. First arrow delta = 2g - 2 - ell, the
/// rest are isomorphisms. Exponent p.
pub fn blocking_chain(
    ctx: &CurveContext,
    ell: i64,
) -> Result<GradedHiggsBundle, ConstructionError> {
    let params = BlockingParams::new(ctx, ell)?;
    let p = params.p as i64;
    let l = LineClass::twist("L", params.d_l);
    let a = LineClass::twist("A", params.ell);
    let mut summands = Vec::with_capacity(params.rank());
    summands.push(a.tensor(&l)?.tensor(&LineClass::canonical_power(p - 1))?);
    for i in (0..p).rev() {
        summands.push(l.tensor(&LineClass::canonical_power(i))?);
    }
    let base = BundleSum::new(*ctx, summands)?;
    Ok(GradedHiggsBundle::chain(base))
}

/// Slope bound for a rank n + 1 subsheaf of the blocking flat whose line
/// part is nontrivial: ((n^2 - n + 2p - 2)(g - 1) + ell) / (n + 1) + d_l.
pub fn case_bound(params: &BlockingParams, n: i64) -> Rational64 {
    let (g, p) = (params.g as i64, params.p as i64);
    Rational64::new((n * n - n + 2 * p - 2) * (g - 1) + params.ell, n + 1)
        + Rational64::from_integer(params.d_l)
}

/// Clearing denominators in mu(flat) - case_bound(n) leaves
/// (p - n) * (n (p + 1)(g - 1) - (p - 1)(g - 1) - ell),
/// which must be nonnegative for 1 <= n <= p - 1 and vanishes only at
/// n = 1, ell = 2g - 2.
pub fn reduced_case_expression(params: &BlockingParams, n: i64) -> i64 {
    let (g, p) = (params.g as i64, params.p as i64);
    (p - n) * (n * (p + 1) * (g - 1) - (p - 1) * (g - 1) - params.ell)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityProof {
    pub params: BlockingParams,
    pub claims: Vec<Claim>,
    pub stable: bool,
}

/// Proves slope stability of the blocking chain: the case inequality for
/// every subsheaf rank, the boundary case through the chain tails, and the
/// full subset search as the final word.
pub fn verify_blocking_stability(
    ctx: &CurveContext,
    ell: i64,
) -> Result<StabilityProof, ConstructionError> {
    let params = BlockingParams::new(ctx, ell)?;
    let chain = blocking_chain(ctx, ell)?;
    let mu = chain.slope();
    let mut claims = Vec::new();
    let mut stable = true;

    let degree_ok = chain.degree() == Rational64::from_integer(params.flat_degree());
    stable &= degree_ok;
    claims.push(
        Claim::computed("degree ledger")
            .with("degree", frac_string(chain.degree()))
            .with("slope", frac_string(mu))
            .check(degree_ok),
    );

    let divisible = cartier_descent_degree(ctx, chain.degree()).is_ok();
    stable &= divisible;
    claims.push(
        Claim::computed("degree divisible by p")
            .with("p", params.p)
            .check(divisible),
    );

    for n in 1..params.p as i64 {
        let reduced = reduced_case_expression(&params, n);
        let boundary = n == 1 && params.ell == ctx.canonical_degree();
        let ok = if boundary { reduced == 0 } else { reduced > 0 };
        stable &= ok;
        let mut c = Claim::computed("subsheaf case inequality")
            .with("n", n)
            .with("bound", frac_string(case_bound(&params, n)))
            .with("reduced", reduced)
            .check(ok);
        if boundary {
            c = c.with(
                "boundary",
                "bound meets mu; excluded through the chain tails below",
            );
        }
        claims.push(c);
    }

    // the boundary case and every invariant subobject at once
    let verdict = chain.stability_verdict()?;
    let worst = chain.max_proper_invariant_slope()?;
    stable &= verdict.is_stable();
    claims.push(
        Claim::computed("invariant subobject search")
            .with("status", format!("{:?}", verdict.status))
            .with(
                "max proper slope",
                worst.map_or("none".into(), |w| frac_string(w.slope)),
            )
            .check(verdict.is_stable()),
    );

    Ok(StabilityProof {
        params,
        claims,
        stable,
    })
}

/// The blocking flat object, its stable regrading registered.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockingFlat {
    pub params: BlockingParams,
    pub flat: FlatObject,
    pub graded: GradedHiggsBundle,
    pub proof: StabilityProof,
}

pub fn blocking_flat(ctx: &CurveContext, ell: i64) -> Result<BlockingFlat, ConstructionError> {
    let params = BlockingParams::new(ctx, ell)?;
    let graded = blocking_chain(ctx, ell)?;
    let proof = verify_blocking_stability(ctx, ell)?;
    let mut flat = FlatObject::new(
        *ctx,
        params.rank(),
        graded.degree(),
        true,
        Provenance::Counterexample {
            p: params.p,
            g: params.g,
            ell: params.ell,
        },
    );
    flat.register_filtration("stable", graded.clone())?;
    Ok(BlockingFlat {
        params,
        flat,
        graded,
        proof,
    })
}

/// The Cartier transform of the blocking flat: a semistable Higgs term of
/// rank p + 1 and degree flat_degree / p on which the flow blocks
/// immediately, because its only regrading has exponent p.
pub fn blocking_higgs_term(ctx: &CurveContext, ell: i64) -> Result<HiggsObject, ConstructionError> {
    let built = blocking_flat(ctx, ell)?;
    let degree = cartier_descent_degree(ctx, built.flat.degree())?;
    Ok(HiggsObject::Opaque(OpaqueHiggs {
        context: *ctx,
        rank: built.params.rank(),
        degree,
        exponent: ctx.prime() as usize - 1,
        stability: StabilityFlag::Stable,
        citation: "the Cartier transform of a flat bundle with stable regrading is stable".into(),
        source: OpaqueSource::CartierTransformOf(Box::new(built.flat)),
    }))
}

/// A semistable, not strongly semistable term of any rank >= p + 1: the
/// blocking term at ell = 2g - 2 (slope g - 1) plus generic lines of
/// degree g - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BigRankTerm {
    pub object: HiggsObject,
    pub rank: usize,
    pub slope: Rational64,
    pub line_count: usize,
}

pub fn semistable_not_strongly(
    ctx: &CurveContext,
    rank: usize,
) -> Result<BigRankTerm, ConstructionError> {
    ctx.require_genus_at_least(2)?;
    let p = ctx.prime() as usize;
    if rank < p + 1 {
        return Err(ConstructionError::RankTooSmall { rank, min: p + 1 });
    }
    let ell = ctx.canonical_degree();
    let core = blocking_flat(ctx, ell)?;
    let line_count = rank - core.params.rank();
    let mut parts = vec![core.flat];
    let assumptions = Assumptions::default();
    for i in 0..line_count {
        let line = LineClass::twist(&format!("M{}", i + 1), ctx.half_canonical_degree());
        let term = HiggsObject::Graded(GradedHiggsBundle::zero_field(BundleSum::line(*ctx, line)));
        parts.push(inverse_cartier(&term, &assumptions)?);
    }
    let flat = FlatObject::direct_sum(parts)?;
    let degree = cartier_descent_degree(ctx, flat.degree())?;
    let slope = degree / Rational64::from_integer(rank as i64);
    debug_assert_eq!(slope, Rational64::from_integer(ctx.half_canonical_degree()));
    let object = HiggsObject::Opaque(OpaqueHiggs {
        context: *ctx,
        rank,
        degree,
        exponent: p - 1,
        stability: StabilityFlag::Semistable,
        citation: "direct sum of semistable terms of one slope".into(),
        source: OpaqueSource::CartierTransformOf(Box::new(flat)),
    });
    Ok(BigRankTerm {
        object,
        rank,
        slope,
        line_count,
    })
}

/// Two strongly semistable terms whose tensor product is not strongly
/// semistable: a rank-2 term tied to the uniformizing bundle and the
/// weight-zero pushforward of rank p.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorCounterexample {
    pub first: HiggsObject,
    pub second: HiggsObject,
    pub product: HiggsObject,
    /// The polystable regrading of the product's transform; exponent p.
    pub certificate_graded: GradedHiggsBundle,
    /// Jordan type of the grid form of that regrading: [p + 1, p - 1].
    pub grid_jordan: Vec<usize>,
    pub claims: Vec<Claim>,
}

pub fn tensor_counterexample(
    ctx: &CurveContext,
    assumptions: &Assumptions,
) -> Result<TensorCounterexample, ConstructionError> {
    ctx.require_genus_at_least(2)?;
    let p = ctx.prime() as usize;
    let mut claims = Vec::new();

    // first factor: rank 2, degree (g - 1) in characteristic 2, degree 0
    // for odd p; both flow back onto the uniformizing bundle
    let (first, v1, gr1) = if p == 2 {
        let graded = GradedHiggsBundle::chain(BundleSum::new(
            *ctx,
            vec![LineClass::canonical_power(1), LineClass::structure()],
        )?);
        let mut v1 = FlatObject::new(*ctx, 2, graded.degree(), true, Provenance::CharTwoExtension);
        v1.register_filtration("hn", graded.clone())?;
        claims.push(Claim::rule(
            "rank-2 flat extension of a theta characteristic by its inverse",
            "existence of nonsplit flat extensions in characteristic 2",
        ));
        let first = HiggsObject::Opaque(OpaqueHiggs {
            context: *ctx,
            rank: 2,
            degree: cartier_descent_degree(ctx, graded.degree())?,
            exponent: 1,
            stability: StabilityFlag::Semistable,
            citation: "the Cartier transform of a semistable flat bundle is semistable".into(),
            source: OpaqueSource::CartierTransformOf(Box::new(v1.clone())),
        });
        (first, v1, graded)
    } else {
        if !assumptions.generic_curve {
            return Err(ConstructionError::GenericityRequired);
        }
        let tau = LineClass::torsion(FLOW_TORSION_LABEL, 2)?;
        let first = HiggsObject::Graded(sym_uniformizing(*ctx, 1).tensor_line(&tau)?);
        let v1 = inverse_cartier(&first, assumptions)?;
        // the torsion twists cancel: the regrading is the untwisted bundle
        let gr1 = crate::flow::grade(&v1, "periodic", assumptions)?;
        claims.push(
            Claim::rule(
                "periodic rank-2 flow",
                "two-periodicity of the uniformizing flow on a generic curve",
            )
            .with("regrading", "uniformizing bundle, torsion cancelled")
            .check(gr1 == sym_uniformizing(*ctx, 1)),
        );
        (first, v1, gr1)
    };

    // second factor: the weight-zero pushforward with zero Higgs field
    let source_line = LineClass::half_canonical_power(1 - p as i64);
    let push = PushforwardBundle::new(*ctx, source_line.clone())?;
    claims.push(
        Claim::rule("pushforward factor", push.stability_citation())
            .with("rank", push.rank())
            .with("degree", frac_string(push.degree()))
            .check(push.degree() == Rational64::from_integer(0)),
    );
    let second = HiggsObject::Opaque(OpaqueHiggs {
        context: *ctx,
        rank: p,
        degree: push.degree(),
        exponent: 0,
        stability: push.stability(),
        citation: push.stability_citation().into(),
        source: OpaqueSource::ZeroHiggsField,
    });
    let v2 = FlatObject::new(
        *ctx,
        p,
        Rational64::from_integer(0),
        true,
        Provenance::PushforwardPullback(source_line),
    );
    let gr2 = crate::flow::grade(&v2, "canonical", assumptions)?;

    // transform of the product and its polystable regrading
    let mut w = v1.tensor(&v2)?;
    let half = LineClass::half_canonical_power(1);
    let certificate_graded = if p == 2 {
        sym_uniformizing(*ctx, 2)
            .direct_sum(&sym_uniformizing(*ctx, 0))?
            .tensor_line(&half)?
    } else {
        sym_uniformizing(*ctx, p as u32).direct_sum(&sym_uniformizing(*ctx, p as u32 - 2))?
    };
    w.register_filtration("polystable", certificate_graded.clone())?;
    let registered = &w.filtrations()[0];
    claims.push(
        Claim::computed("product regrading is polystable of exponent p")
            .with("exponent", certificate_graded.nilpotency_exponent()?)
            .with("polystable", registered.gr_polystable)
            .check(registered.gr_polystable && certificate_graded.nilpotency_exponent()? == p),
    );

    // cross-check: the grid form of gr1 ox gr2 has the split's Jordan type
    let grid = gr1.tensor(&gr2)?;
    let grid_jordan = grid.jordan_type()?;
    let mut chain_lengths: Vec<usize> = certificate_graded
        .chain_partition()?
        .iter()
        .map(|c| c.len())
        .collect();
    chain_lengths.sort_unstable_by(|a, b| b.cmp(a));
    claims.push(
        Claim::computed("grid Jordan type matches the split")
            .with("jordan", format!("{grid_jordan:?}"))
            .check(grid_jordan == vec![p + 1, p - 1] && grid_jordan == chain_lengths),
    );

    let product_degree = cartier_descent_degree(ctx, w.degree())?;
    let product = HiggsObject::Opaque(OpaqueHiggs {
        context: *ctx,
        rank: 2 * p,
        degree: product_degree,
        exponent: 1,
        stability: StabilityFlag::Semistable,
        citation: "a tensor product of strongly semistable terms is semistable".into(),
        source: OpaqueSource::CartierTransformOf(Box::new(w)),
    });
    claims.push(
        Claim::computed("product ledger")
            .with("rank", 2 * p)
            .with("degree", frac_string(product_degree)),
    );

    Ok(TensorCounterexample {
        first,
        second,
        product,
        certificate_graded,
        grid_jordan,
        claims,
    })
}

/// Dimension comparison for extensions of the structure sheaf: gluing two
/// rank-2 self-extensions along their graded costs 3g - 1 parameters,
/// against 4g - 2 for the rank-4 sum. Strict from genus 2 on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionComparison {
    pub g: u32,
    pub lhs: i64,
    pub rhs: i64,
    pub strict: bool,
    pub claims: Vec<Claim>,
}

pub fn extension_count_comparison(
    ctx: &CurveContext,
) -> Result<ExtensionComparison, ConstructionError> {
    ctx.require_genus_at_least(1)?;
    let g = ctx.genus() as i64;
    let zero = Rational64::from_integer(0);
    let mut claims = Vec::new();
    let h1_structure = serre_dual_h0(ctx, 1, zero, 1)?;
    claims.push(
        Claim::computed("h1 of the structure sheaf")
            .with("value", h1_structure)
            .check(h1_structure == g),
    );
    let h1_ext = serre_dual_h0(ctx, 2, zero, 1)?;
    claims.push(
        Claim::rule(
            "h1 of a nonsplit self-extension of the structure sheaf",
            "global sections of a nonsplit extension are one-dimensional",
        )
        .with("value", h1_ext)
        .check(h1_ext == 2 * g - 1),
    );
    let h1_sum = serre_dual_h0(ctx, 4, zero, 2)?;
    claims.push(
        Claim::computed("h1 of the rank-4 sum of two such extensions")
            .with("value", h1_sum)
            .check(h1_sum == 4 * g - 2),
    );
    let lhs = h1_structure + h1_ext;
    let rhs = h1_sum;
    let strict = lhs < rhs;
    claims.push(
        Claim::computed("comparison")
            .with("lhs", lhs)
            .with("rhs", rhs)
            .with("strict", strict)
            .check(lhs <= rhs),
    );
    Ok(ExtensionComparison {
        g: ctx.genus(),
        lhs,
        rhs,
        strict,
        claims,
    })
}
