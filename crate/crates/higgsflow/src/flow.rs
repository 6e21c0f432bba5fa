//! The inverse Cartier flow and strong semistability verdicts.
//!
//! One flow step sends a nilpotent Higgs term to a flat object by the
//! inverse Cartier transform, then regrades the flat object along a
//! gr-semistable filtration. The transform is not computable on raw data,
//! so flat objects carry provenance: either an explicit formula applies
//! (zero fields pull back, pushforward pullbacks regrade canonically, the
//! rank-2 uniformizing bundle is periodic on a generic curve) or a
//! filtration has been registered by a construction. When neither holds the
//! flow blocks rather than guess.
//!
//! Blocking on exponent is where non-strong-semistability certificates come
//! from: a gr-polystable filtration minimizes the nilpotency exponent over
//! all gr-semistable regradings, so a polystable graded of exponent p
//! certifies that no admissible continuation exists.

use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

use crate::curve::CurveContext;
use crate::frac::frac_string;
use crate::frobenius::{canonical_graded, pullback_bundle, FrobeniusError, StabilityFlag};
use crate::higgs::{sym_uniformizing, GradedHiggsBundle, HiggsError};
use crate::sheaf::{BundleSum, LineClass, SheafError};

/// Reserved 2-torsion twist used by the periodic rank-2 flow.
pub const FLOW_TORSION_LABEL: &str = "tau";

/// Rules that only hold for a general member of the moduli of curves must
/// be switched on explicitly; every use is recorded in the trace.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Assumptions {
    pub generic_curve: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("nilpotency exponent {exponent} exceeds the limit {limit}")]
    ExponentTooLarge { exponent: usize, limit: usize },
    #[error("flow terms must be semistable")]
    NotSemistable,
    #[error("no filtration registered under id {0:?}")]
    UnknownFiltration(String),
    #[error("filtration {id:?} rejected: {reason}")]
    FiltrationMismatch { id: String, reason: String },
    #[error("direct sums need at least one part, over one context")]
    BadDirectSum,
    #[error(transparent)]
    Higgs(#[from] HiggsError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
}

/// Where an opaque Higgs term comes from; this is what makes its inverse
/// Cartier transform computable.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpaqueSource {
    /// The term is the Cartier transform of a known flat object, so the
    /// transform inverts to exactly that object.
    CartierTransformOf(Box<FlatObject>),
    /// Underlying bundle unknown, field zero: the transform is a Frobenius
    /// pullback with its canonical connection.
    ZeroHiggsField,
}

/// A Higgs term whose underlying bundle is not a sum of line classes we can
/// name. Rank, degree, an exponent bound, and a sourced stability flag are
/// all the flow needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpaqueHiggs {
    pub context: CurveContext,
    pub rank: usize,
    #[serde(with = "crate::frac")]
    pub degree: Rational64,
    pub exponent: usize,
    pub stability: StabilityFlag,
    pub citation: String,
    pub source: OpaqueSource,
}

/// A term of the flow.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum HiggsObject {
    Graded(GradedHiggsBundle),
    Opaque(OpaqueHiggs),
}

impl HiggsObject {
    pub fn context(&self) -> &CurveContext {
        match self {
            HiggsObject::Graded(g) => g.context(),
            HiggsObject::Opaque(o) => &o.context,
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            HiggsObject::Graded(g) => g.rank(),
            HiggsObject::Opaque(o) => o.rank,
        }
    }

    pub fn degree(&self) -> Rational64 {
        match self {
            HiggsObject::Graded(g) => g.degree(),
            HiggsObject::Opaque(o) => o.degree,
        }
    }

    pub fn slope(&self) -> Rational64 {
        self.degree() / Rational64::from_integer(self.rank() as i64)
    }

    pub fn exponent(&self) -> Result<usize, FlowError> {
        match self {
            HiggsObject::Graded(g) => Ok(g.nilpotency_exponent()?),
            HiggsObject::Opaque(o) => Ok(o.exponent),
        }
    }

    /// Graded terms are decided by the subset search; opaque terms carry a
    /// sourced flag and are semistable by construction.
    pub fn is_semistable(&self) -> Result<bool, FlowError> {
        match self {
            HiggsObject::Graded(g) => Ok(g.stability_verdict()?.is_semistable()),
            HiggsObject::Opaque(_) => Ok(true),
        }
    }

    pub fn summary(&self) -> TermSummary {
        match self {
            HiggsObject::Graded(g) => TermSummary {
                kind: "graded".into(),
                rank: g.rank(),
                degree: frac_string(g.degree()),
                exponent: g.nilpotency_exponent().ok(),
                summands: Some(g.base().summands().iter().map(|l| l.label()).collect()),
            },
            HiggsObject::Opaque(o) => TermSummary {
                kind: "opaque".into(),
                rank: o.rank,
                degree: frac_string(o.degree),
                exponent: Some(o.exponent),
                summands: None,
            },
        }
    }
}

/// How a flat object arose; drives the choice of regrading.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Generic inverse Cartier transform of a graded term; nothing more is
    /// known about its filtrations.
    InverseCartierOf(Box<GradedHiggsBundle>),
    /// Frobenius pullback of a named sum with its canonical connection.
    CanonicalConnectionOn(BundleSum),
    /// Frobenius pullback of an opaque bundle with its canonical connection.
    CanonicalConnectionOpaque,
    /// F^* F_* of a line class; regrades along the canonical filtration.
    PushforwardPullback(LineClass),
    /// Periodic rank-2 flow on a generic curve; the graded is the
    /// uniformizing bundle twisted by the stored line.
    Uniformizing {
        twist: LineClass,
    },
    /// The rank-2 flat extension built from a theta characteristic in
    /// characteristic 2.
    CharTwoExtension,
    /// The destabilizing flat family member, by its parameters.
    Counterexample {
        p: u32,
        g: u32,
        ell: i64,
    },
    DirectSum(Vec<FlatObject>),
    TensorProduct(Box<FlatObject>, Box<FlatObject>),
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::InverseCartierOf(_) => "inverse-cartier",
            Provenance::CanonicalConnectionOn(_) => "canonical-connection",
            Provenance::CanonicalConnectionOpaque => "canonical-connection-opaque",
            Provenance::PushforwardPullback(_) => "pushforward-pullback",
            Provenance::Uniformizing { .. } => "uniformizing-periodic",
            Provenance::CharTwoExtension => "char-two-extension",
            Provenance::Counterexample { .. } => "counterexample",
            Provenance::DirectSum(_) => "direct-sum",
            Provenance::TensorProduct(_, _) => "tensor-product",
        }
    }
}

/// A filtration of a flat object known to this tool, stored through its
/// graded. Flags are computed at registration, never asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnownFiltration {
    pub id: String,
    pub graded: GradedHiggsBundle,
    pub gr_semistable: bool,
    pub gr_polystable: bool,
    /// Stable graded forces uniqueness of the gr-semistable filtration.
    pub unique: bool,
}

/// A flat bundle with connection, tracked by ledger data and provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatObject {
    context: CurveContext,
    rank: usize,
    #[serde(with = "crate::frac")]
    degree: Rational64,
    semistable: bool,
    provenance: Provenance,
    filtrations: Vec<KnownFiltration>,
}

impl FlatObject {
    pub fn new(
        context: CurveContext,
        rank: usize,
        degree: Rational64,
        semistable: bool,
        provenance: Provenance,
    ) -> Self {
        FlatObject {
            context,
            rank,
            degree,
            semistable,
            provenance,
            filtrations: Vec::new(),
        }
    }

    pub fn context(&self) -> &CurveContext {
        &self.context
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> Rational64 {
        self.degree
    }

    pub fn slope(&self) -> Rational64 {
        self.degree / Rational64::from_integer(self.rank as i64)
    }

    pub fn is_semistable(&self) -> bool {
        self.semistable
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn filtrations(&self) -> &[KnownFiltration] {
        &self.filtrations
    }

    /// Registers a filtration through its graded. Rank, degree, and context
    /// must match the ledger; stability flags are computed here.
    pub fn register_filtration(
        &mut self,
        id: &str,
        graded: GradedHiggsBundle,
    ) -> Result<(), FlowError> {
        let reject = |reason: &str| FlowError::FiltrationMismatch {
            id: id.to_string(),
            reason: reason.to_string(),
        };
        if self.filtrations.iter().any(|f| f.id == id) {
            return Err(reject("id already registered"));
        }
        if *graded.context() != self.context {
            return Err(reject("context differs"));
        }
        if graded.rank() != self.rank {
            return Err(reject("rank differs"));
        }
        if graded.degree() != self.degree {
            return Err(reject("degree differs"));
        }
        graded.validate()?;
        let verdict = graded.stability_verdict()?;
        let gr_polystable = graded.polystable_check()?;
        self.filtrations.push(KnownFiltration {
            id: id.to_string(),
            gr_semistable: verdict.is_semistable(),
            gr_polystable,
            unique: verdict.is_stable(),
            graded,
        });
        Ok(())
    }

    /// Combines parts into one flat object; semistable only when all parts
    /// are and slopes agree.
    pub fn direct_sum(parts: Vec<FlatObject>) -> Result<FlatObject, FlowError> {
        let first = parts.first().ok_or(FlowError::BadDirectSum)?;
        let context = first.context;
        let slope0 = first.slope();
        if parts.iter().any(|f| f.context != context) {
            return Err(FlowError::BadDirectSum);
        }
        let rank = parts.iter().map(|f| f.rank).sum();
        let degree = parts.iter().map(|f| f.degree).sum();
        let semistable = parts.iter().all(|f| f.semistable && f.slope() == slope0);
        Ok(FlatObject {
            context,
            rank,
            degree,
            semistable,
            provenance: Provenance::DirectSum(parts),
            filtrations: Vec::new(),
        })
    }

    /// Tensor product ledger: rank multiplies, degrees cross-add.
    pub fn tensor(&self, other: &FlatObject) -> Result<FlatObject, FlowError> {
        if self.context != other.context {
            return Err(FlowError::Sheaf(SheafError::ContextMismatch));
        }
        let rank = self.rank * other.rank;
        let degree = self.degree * Rational64::from_integer(other.rank as i64)
            + other.degree * Rational64::from_integer(self.rank as i64);
        Ok(FlatObject {
            context: self.context,
            rank,
            degree,
            semistable: self.semistable && other.semistable,
            provenance: Provenance::TensorProduct(Box::new(self.clone()), Box::new(other.clone())),
            filtrations: Vec::new(),
        })
    }
}

/// The regrading the flow will take out of a flat object.
#[derive(Debug, Clone, PartialEq)]
pub enum GrChoice {
    /// A concrete filtration, registered or synthesized from provenance.
    Filtration(KnownFiltration),
    /// Trivial filtration of an opaque flat whose underlying bundle is
    /// known semistable; the next term is opaque with zero field.
    TrivialOpaque { citation: String },
    /// No admissible regrading is known; the flow must block.
    Unknown { reason: String },
}

/// Certificate that every gr-semistable regrading of a flat object has
/// nilpotency exponent at least `exponent`: the witness filtration is
/// gr-polystable, and polystable gradeds minimize the exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCertificate {
    pub filtration_id: String,
    pub exponent: usize,
    pub graded: GradedHiggsBundle,
    pub polystable_verified: bool,
    pub minimality_rule: String,
}

const MINIMALITY_RULE: &str =
    "a gr-polystable filtration attains the minimal nilpotency exponent among gr-semistable filtrations";

/// Detects terms of the form (uniformizing bundle) tensor (degree-zero
/// line): a two-step chain with top = bottom * K and a torsion-or-trivial
/// twist. Returns the twist.
fn uniformizing_twist(g: &GradedHiggsBundle) -> Option<LineClass> {
    if g.rank() != 2 || g.arrows().len() != 1 {
        return None;
    }
    let a = g.arrows()[0];
    let top = &g.base().summands()[a.from];
    let bottom = &g.base().summands()[a.to];
    if *top != bottom.tensor(&LineClass::canonical_power(1)).ok()? {
        return None;
    }
    let twist = bottom.tensor(&LineClass::half_canonical_power(1)).ok()?;
    if twist.kc_halves() != 0
        || !twist.twist_degree().is_integer()
        || twist.twist_degree() != Rational64::from_integer(0)
    {
        return None;
    }
    Some(twist)
}

/// Inverse Cartier transform. Defined for nilpotency exponent at most
/// p - 1; multiplies degree by p. The returned provenance records exactly
/// which rule made the transform computable.
pub fn inverse_cartier(h: &HiggsObject, a: &Assumptions) -> Result<FlatObject, FlowError> {
    let ctx = *h.context();
    let p = ctx.prime() as usize;
    let exponent = h.exponent()?;
    if exponent > p - 1 {
        return Err(FlowError::ExponentTooLarge {
            exponent,
            limit: p - 1,
        });
    }
    let semistable = h.is_semistable()?;
    let p_rat = Rational64::from_integer(p as i64);
    match h {
        HiggsObject::Opaque(o) => match &o.source {
            OpaqueSource::CartierTransformOf(v) => Ok((**v).clone()),
            OpaqueSource::ZeroHiggsField => Ok(FlatObject::new(
                ctx,
                o.rank,
                o.degree * p_rat,
                semistable,
                Provenance::CanonicalConnectionOpaque,
            )),
        },
        HiggsObject::Graded(g) => {
            g.validate()?;
            if g.arrows().is_empty() {
                let pulled = pullback_bundle(g.base());
                let mut flat = FlatObject::new(
                    ctx,
                    pulled.rank(),
                    pulled.degree(),
                    semistable,
                    Provenance::CanonicalConnectionOn(pulled.clone()),
                );
                flat.register_filtration("trivial", GradedHiggsBundle::zero_field(pulled))?;
                return Ok(flat);
            }
            if ctx.prime() > 2 && ctx.genus() >= 2 && a.generic_curve {
                if let Some(twist) = uniformizing_twist(g) {
                    let tau = LineClass::torsion(FLOW_TORSION_LABEL, 2)?;
                    let next_twist = twist.tensor_power(p as i64).tensor(&tau)?;
                    let graded = sym_uniformizing(ctx, 1).tensor_line(&next_twist)?;
                    let mut flat = FlatObject::new(
                        ctx,
                        2,
                        g.degree() * p_rat,
                        semistable,
                        Provenance::Uniformizing { twist: next_twist },
                    );
                    flat.register_filtration("periodic", graded)?;
                    return Ok(flat);
                }
            }
            Ok(FlatObject::new(
                ctx,
                g.rank(),
                g.degree() * p_rat,
                semistable,
                Provenance::InverseCartierOf(Box::new(g.clone())),
            ))
        }
    }
}

/// Picks the regrading of a flat object: registered filtrations first
/// (unique before polystable before merely semistable), then filtrations
/// synthesized from provenance, then the genus <= 1 rule, and Unknown when
/// nothing applies.
pub fn choose_gr_semistable(f: &FlatObject, a: &Assumptions) -> GrChoice {
    let mut registered: Vec<&KnownFiltration> = f.filtrations.iter().collect();
    registered.sort_by_key(|k| std::cmp::Reverse((k.unique, k.gr_polystable, k.gr_semistable)));
    if let Some(best) = registered.first() {
        return GrChoice::Filtration((*best).clone());
    }
    if let Some(choice) = synthesized_choice(f, a) {
        return choice;
    }
    if f.context.genus() <= 1 && f.semistable {
        return GrChoice::TrivialOpaque {
            citation: "on curves of genus at most 1 the underlying bundle of a semistable flat bundle is semistable".into(),
        };
    }
    GrChoice::Unknown {
        reason: format!(
            "no gr-semistable filtration known for this {} flat object",
            f.provenance.tag()
        ),
    }
}

fn synthesized_choice(f: &FlatObject, a: &Assumptions) -> Option<GrChoice> {
    match &f.provenance {
        Provenance::CanonicalConnectionOn(b) => {
            known_filtration_of(f, "trivial", GradedHiggsBundle::zero_field(b.clone()))
        }
        Provenance::PushforwardPullback(l) => {
            let graded = canonical_graded(f.context, l).ok()?;
            known_filtration_of(f, "canonical", graded)
        }
        Provenance::Uniformizing { twist } => {
            let graded = sym_uniformizing(f.context, 1).tensor_line(twist).ok()?;
            known_filtration_of(f, "periodic", graded)
        }
        Provenance::CanonicalConnectionOpaque if f.semistable => Some(GrChoice::TrivialOpaque {
            citation: "Frobenius pullback of a strongly semistable bundle, trivial filtration"
                .into(),
        }),
        Provenance::DirectSum(parts) => {
            let mut combined: Option<GradedHiggsBundle> = None;
            for part in parts {
                match choose_gr_semistable(part, a) {
                    GrChoice::Filtration(k) => {
                        combined = Some(match combined {
                            None => k.graded,
                            Some(acc) => acc.direct_sum(&k.graded).ok()?,
                        });
                    }
                    _ => return None,
                }
            }
            known_filtration_of(f, "componentwise", combined?)
        }
        _ => None,
    }
}

/// Wraps a synthesized graded in a filtration record with honestly computed
/// flags; bails out (to Unknown) if the graded does not match the ledger.
fn known_filtration_of(f: &FlatObject, id: &str, graded: GradedHiggsBundle) -> Option<GrChoice> {
    if graded.rank() != f.rank || graded.degree() != f.degree {
        return None;
    }
    let verdict = graded.stability_verdict().ok()?;
    let gr_polystable = graded.polystable_check().unwrap_or(false);
    Some(GrChoice::Filtration(KnownFiltration {
        id: id.to_string(),
        gr_semistable: verdict.is_semistable(),
        gr_polystable,
        unique: verdict.is_stable(),
        graded,
    }))
}

/// Looks up a filtration by id, registered or synthesizable.
pub fn grade(f: &FlatObject, id: &str, a: &Assumptions) -> Result<GradedHiggsBundle, FlowError> {
    if let Some(k) = f.filtrations.iter().find(|k| k.id == id) {
        return Ok(k.graded.clone());
    }
    if let Some(GrChoice::Filtration(k)) = synthesized_choice(f, a) {
        if k.id == id {
            return Ok(k.graded);
        }
    }
    Err(FlowError::UnknownFiltration(id.to_string()))
}

/// Smallest nilpotency exponent over the known gr-polystable filtrations,
/// with the witness graded re-verified. None when no polystable filtration
/// is known; that is an honest "don't know", not a certificate.
pub fn minimal_gr_exponent(f: &FlatObject, a: &Assumptions) -> Option<ExponentCertificate> {
    let mut candidates: Vec<KnownFiltration> = f
        .filtrations
        .iter()
        .filter(|k| k.gr_polystable)
        .cloned()
        .collect();
    if let Some(GrChoice::Filtration(k)) = synthesized_choice(f, a) {
        if k.gr_polystable && !candidates.iter().any(|c| c.id == k.id) {
            candidates.push(k);
        }
    }
    let mut best: Option<ExponentCertificate> = None;
    for k in candidates {
        let exponent = k.graded.nilpotency_exponent().ok()?;
        let verified = k.graded.polystable_check().ok()?;
        if !verified {
            continue;
        }
        if best.as_ref().is_none_or(|b| exponent < b.exponent) {
            best = Some(ExponentCertificate {
                filtration_id: k.id,
                exponent,
                graded: k.graded,
                polystable_verified: true,
                minimality_rule: MINIMALITY_RULE.into(),
            });
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermSummary {
    pub kind: String,
    pub rank: usize,
    pub degree: String,
    pub exponent: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summands: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatSummary {
    pub rank: usize,
    pub degree: String,
    pub provenance: String,
    pub semistable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowStep {
    pub index: usize,
    pub flat: FlatSummary,
    pub filtration_id: Option<String>,
    pub term: Option<TermSummary>,
    pub semistable: Option<bool>,
    pub exponent_ok: Option<bool>,
    pub rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FlowOutcome {
    Completed { steps: usize },
    Blocked { at_step: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowTrace {
    pub assumptions: Assumptions,
    pub start: TermSummary,
    pub steps: Vec<FlowStep>,
    pub outcome: FlowOutcome,
    /// On exponent blocks: proof that no regrading stays within bounds.
    pub certificate: Option<ExponentCertificate>,
}

impl FlowTrace {
    pub fn blocked(&self) -> bool {
        matches!(self.outcome, FlowOutcome::Blocked { .. })
    }
}

/// Runs the flow for the given number of steps or until it blocks. The
/// start must be semistable with exponent at most p - 1. Step terms are
/// returned in order; the trace is a value, blocking is not an error.
pub fn run_flow(
    start: &HiggsObject,
    steps: usize,
    a: &Assumptions,
) -> Result<FlowTrace, FlowError> {
    let ctx = *start.context();
    let p = ctx.prime() as usize;
    if let HiggsObject::Graded(g) = start {
        g.validate()?;
    }
    if !start.is_semistable()? {
        return Err(FlowError::NotSemistable);
    }
    let e0 = start.exponent()?;
    if e0 > p - 1 {
        return Err(FlowError::ExponentTooLarge {
            exponent: e0,
            limit: p - 1,
        });
    }

    let mut trace = FlowTrace {
        assumptions: *a,
        start: start.summary(),
        steps: Vec::new(),
        outcome: FlowOutcome::Completed { steps },
        certificate: None,
    };
    let mut current = start.clone();
    for index in 1..=steps {
        let flat = inverse_cartier(&current, a)?;
        let flat_summary = FlatSummary {
            rank: flat.rank(),
            degree: frac_string(flat.degree()),
            provenance: flat.provenance().tag().to_string(),
            semistable: flat.is_semistable(),
        };
        let mut rules = vec![format!("provenance: {}", flat.provenance().tag())];
        if a.generic_curve && matches!(flat.provenance(), Provenance::Uniformizing { .. }) {
            rules.push("generic curve assumed: periodic rank-2 regrading".into());
        }
        match choose_gr_semistable(&flat, a) {
            GrChoice::Unknown { reason } => {
                trace.certificate = minimal_gr_exponent(&flat, a);
                trace.steps.push(FlowStep {
                    index,
                    flat: flat_summary,
                    filtration_id: None,
                    term: None,
                    semistable: None,
                    exponent_ok: None,
                    rules,
                });
                trace.outcome = FlowOutcome::Blocked {
                    at_step: index,
                    reason,
                };
                return Ok(trace);
            }
            GrChoice::TrivialOpaque { citation } => {
                rules.push(citation.clone());
                let term = HiggsObject::Opaque(OpaqueHiggs {
                    context: ctx,
                    rank: flat.rank(),
                    degree: flat.degree(),
                    exponent: 0,
                    stability: StabilityFlag::Semistable,
                    citation,
                    source: OpaqueSource::ZeroHiggsField,
                });
                trace.steps.push(FlowStep {
                    index,
                    flat: flat_summary,
                    filtration_id: None,
                    term: Some(term.summary()),
                    semistable: Some(true),
                    exponent_ok: Some(true),
                    rules,
                });
                current = term;
            }
            GrChoice::Filtration(k) => {
                let exponent = k.graded.nilpotency_exponent()?;
                let semistable = k.graded.stability_verdict()?.is_semistable();
                let exponent_ok = exponent < p;
                rules.push(format!("filtration {:?}", k.id));
                let blocked_reason = if !exponent_ok {
                    Some(format!(
                        "graded exponent {} exceeds p - 1 = {}",
                        exponent,
                        p - 1
                    ))
                } else if !semistable {
                    Some("chosen graded is not semistable".into())
                } else {
                    None
                };
                let term = HiggsObject::Graded(k.graded.clone());
                trace.steps.push(FlowStep {
                    index,
                    flat: flat_summary,
                    filtration_id: Some(k.id.clone()),
                    term: Some(term.summary()),
                    semistable: Some(semistable),
                    exponent_ok: Some(exponent_ok),
                    rules,
                });
                if let Some(reason) = blocked_reason {
                    trace.certificate = minimal_gr_exponent(&flat, a);
                    trace.outcome = FlowOutcome::Blocked {
                        at_step: index,
                        reason,
                    };
                    return Ok(trace);
                }
                current = term;
            }
        }
    }
    Ok(trace)
}

/// Full flow terms (not just summaries) for tests and small runs.
pub fn flow_terms(
    start: &HiggsObject,
    steps: usize,
    a: &Assumptions,
) -> Result<Vec<HiggsObject>, FlowError> {
    let mut out = vec![start.clone()];
    for _ in 0..steps {
        let flat = inverse_cartier(out.last().unwrap(), a)?;
        match choose_gr_semistable(&flat, a) {
            GrChoice::Filtration(k) => out.push(HiggsObject::Graded(k.graded)),
            GrChoice::TrivialOpaque { citation } => {
                out.push(HiggsObject::Opaque(OpaqueHiggs {
                    context: *start.context(),
                    rank: flat.rank(),
                    degree: flat.degree(),
                    exponent: 0,
                    stability: StabilityFlag::Semistable,
                    citation,
                    source: OpaqueSource::ZeroHiggsField,
                }));
            }
            GrChoice::Unknown { .. } => break,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum StrongVerdict {
    StronglySemistable { rule: String },
    NotStronglySemistable { certificate: ExponentCertificate },
    Unknown { reason: String },
}

/// Decides strong semistability where a sound rule applies. Positive
/// verdicts quote their rule; negative verdicts carry a machine-checked
/// exponent certificate; everything else is Unknown.
pub fn strong_semistability_verdict(
    h: &HiggsObject,
    a: &Assumptions,
) -> Result<StrongVerdict, FlowError> {
    let ctx = *h.context();
    let p = ctx.prime() as usize;
    if !h.is_semistable()? {
        return Err(FlowError::NotSemistable);
    }
    let e = h.exponent()?;
    if e > p - 1 {
        return Err(FlowError::ExponentTooLarge {
            exponent: e,
            limit: p - 1,
        });
    }
    if ctx.genus() <= 1 {
        return Ok(StrongVerdict::StronglySemistable {
            rule: "genus at most 1: semistability persists under the flow".into(),
        });
    }
    if h.rank() <= p {
        return Ok(StrongVerdict::StronglySemistable {
            rule:
                "small rank: a semistable nilpotent term of rank at most p is strongly semistable"
                    .into(),
        });
    }
    if let HiggsObject::Graded(g) = h {
        if g.arrows().is_empty() && crate::sheaf::hn_grouping(g.base()).len() == 1 {
            return Ok(StrongVerdict::StronglySemistable {
                rule: "zero field on a constant-slope sum of lines: every flow term is the pullback, again of constant slope".into(),
            });
        }
    }
    let flat = inverse_cartier(h, a)?;
    match minimal_gr_exponent(&flat, a) {
        Some(cert) if cert.exponent > p - 1 => {
            debug_assert!(cert.polystable_verified);
            Ok(StrongVerdict::NotStronglySemistable { certificate: cert })
        }
        Some(cert) => Ok(StrongVerdict::Unknown {
            reason: format!(
                "minimal known graded exponent {} is within bounds; later steps undecided",
                cert.exponent
            ),
        }),
        None => Ok(StrongVerdict::Unknown {
            reason: "no gr-polystable filtration known for the transform".into(),
        }),
    }
}
