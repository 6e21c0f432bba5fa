//! Graded Higgs bundles with one-step arrow diagrams.
//!
//! The model: a direct sum of line classes together with arrows between
//! summands. An arrow u -> v stands for a nonzero map from summand u to
//! summand v tensor K, vanishing on a divisor of degree
//! delta = deg(v) + (2g - 2) - deg(u). Diagrams must be acyclic; a disjoint
//! union of chains is the shape every stability routine works on, while
//! grids (branching diagrams) arise from tensor products and only support
//! rank and Jordan type computations.
//!
//! Stability is slope stability against invariant subobjects spanned by
//! summands. For a chain, those are exactly the tails of the chain, so the
//! search space is the product of tail choices over all chains.

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::CurveContext;
use crate::frac::frac_string;
use crate::sheaf::{BundleStats, BundleSum, LineClass, SheafError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HiggsError {
    #[error("arrow endpoint {0} is out of range")]
    ArrowOutOfRange(usize),
    #[error("duplicate arrow {from} -> {to}")]
    DuplicateArrow { from: usize, to: usize },
    #[error("arrow diagram has a directed cycle")]
    Cyclic,
    #[error("arrows violate Griffiths transversality: {0:?}")]
    NegativeDelta(Vec<String>),
    #[error("operation needs a disjoint union of chains, found branching at summand {0}")]
    NotChainSum(usize),
    #[error("operands live over different curve contexts")]
    ContextMismatch,
    #[error("input is not semistable")]
    NotSemistable,
    #[error("symmetric power decomposition needs m >= 2, got {0}")]
    DecompositionTooSmall(u32),
    #[error("decomposition check failed: {0}")]
    DecompositionMismatch(String),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiggsArrow {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedHiggsBundle {
    base: BundleSum,
    arrows: Vec<HiggsArrow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityStatus {
    Stable,
    StrictlySemistable,
    Unstable,
}

/// A maximizing proper invariant subobject, with exact slope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubWitness {
    pub indices: Vec<usize>,
    pub rank: usize,
    #[serde(with = "crate::frac")]
    pub slope: Rational64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityVerdict {
    pub status: StabilityStatus,
    #[serde(with = "crate::frac")]
    pub slope: Rational64,
    /// Present for strictly semistable and unstable verdicts: the maximal
    /// slope witness of smallest rank, ties broken lexicographically.
    pub witness: Option<SubWitness>,
}

impl StabilityVerdict {
    pub fn is_semistable(&self) -> bool {
        self.status != StabilityStatus::Unstable
    }

    pub fn is_stable(&self) -> bool {
        self.status == StabilityStatus::Stable
    }
}

/// Kernel filtration of the arrow diagram, stored from the full index set
/// down to the empty set. steps() counts the inclusions, which exceeds the
/// nilpotency exponent by one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HiggsFiltration {
    levels: Vec<Vec<usize>>,
}

impl HiggsFiltration {
    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }

    /// Index sets of the graded pieces, top level first.
    pub fn graded_pieces(&self) -> Vec<Vec<usize>> {
        self.levels
            .windows(2)
            .map(|w| w[0].iter().filter(|i| !w[1].contains(i)).copied().collect())
            .collect()
    }
}

impl GradedHiggsBundle {
    pub fn new(base: BundleSum, arrows: Vec<(usize, usize)>) -> Result<Self, HiggsError> {
        let n = base.rank();
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(arrows.len());
        for (from, to) in arrows {
            if from >= n {
                return Err(HiggsError::ArrowOutOfRange(from));
            }
            if to >= n {
                return Err(HiggsError::ArrowOutOfRange(to));
            }
            if !seen.insert((from, to)) {
                return Err(HiggsError::DuplicateArrow { from, to });
            }
            out.push(HiggsArrow { from, to });
        }
        Ok(GradedHiggsBundle { base, arrows: out })
    }

    /// Zero Higgs field on the given sum.
    pub fn zero_field(base: BundleSum) -> Self {
        GradedHiggsBundle {
            base,
            arrows: Vec::new(),
        }
    }

    /// Single chain in summand order: 0 -> 1 -> ... -> n-1.
    pub fn chain(base: BundleSum) -> Self {
        let arrows = (1..base.rank())
            .map(|i| HiggsArrow { from: i - 1, to: i })
            .collect();
        GradedHiggsBundle { base, arrows }
    }

    /// Consecutive chains of the given lengths, covering all summands.
    pub fn chains(base: BundleSum, lengths: &[usize]) -> Result<Self, HiggsError> {
        if lengths.iter().sum::<usize>() != base.rank() {
            return Err(HiggsError::ArrowOutOfRange(base.rank()));
        }
        let mut arrows = Vec::new();
        let mut start = 0;
        for &len in lengths {
            for i in start + 1..start + len {
                arrows.push(HiggsArrow { from: i - 1, to: i });
            }
            start += len;
        }
        Ok(GradedHiggsBundle { base, arrows })
    }

    pub fn base(&self) -> &BundleSum {
        &self.base
    }

    pub fn arrows(&self) -> &[HiggsArrow] {
        &self.arrows
    }

    pub fn context(&self) -> &CurveContext {
        self.base.context()
    }

    pub fn rank(&self) -> usize {
        self.base.rank()
    }

    pub fn degree(&self) -> Rational64 {
        self.base.degree()
    }

    pub fn slope(&self) -> Rational64 {
        self.base.slope()
    }

    pub fn stats(&self) -> BundleStats {
        self.base.stats()
    }

    /// Vanishing divisor degree of one arrow:
    /// deg(target) + (2g - 2) - deg(source). Nonnegative for honest maps.
    pub fn arrow_delta(&self, a: &HiggsArrow) -> Rational64 {
        self.base.summand_degree(a.to) + Rational64::from_integer(self.context().canonical_degree())
            - self.base.summand_degree(a.from)
    }

    /// Checks acyclicity and nonnegativity of every arrow's delta; lists all
    /// offending arrows at once.
    pub fn validate(&self) -> Result<(), HiggsError> {
        self.topological_order()?;
        let bad: Vec<String> = self
            .arrows
            .iter()
            .filter(|a| self.arrow_delta(a) < Rational64::zero())
            .map(|a| {
                format!(
                    "{} -> {} (delta {})",
                    a.from,
                    a.to,
                    frac_string(self.arrow_delta(a))
                )
            })
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(HiggsError::NegativeDelta(bad))
        }
    }

    fn topological_order(&self) -> Result<Vec<usize>, HiggsError> {
        let n = self.rank();
        let mut indegree = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for a in &self.arrows {
            indegree[a.to] += 1;
            succ[a.from].push(a.to);
        }
        let mut queue: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop() {
            order.push(v);
            for &w in &succ[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    queue.push(w);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(HiggsError::Cyclic)
        }
    }

    /// Longest outgoing path length from each summand, in arrows.
    fn out_path_lengths(&self) -> Result<Vec<usize>, HiggsError> {
        let order = self.topological_order()?;
        let n = self.rank();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for a in &self.arrows {
            succ[a.from].push(a.to);
        }
        let mut len = vec![0usize; n];
        for &v in order.iter().rev() {
            for &w in &succ[v] {
                len[v] = len[v].max(len[w] + 1);
            }
        }
        Ok(len)
    }

    /// Largest e with theta^e nonzero; the longest arrow path. Zero fields
    /// have exponent 0.
    pub fn nilpotency_exponent(&self) -> Result<usize, HiggsError> {
        Ok(self.out_path_lengths()?.into_iter().max().unwrap_or(0))
    }

    /// ker(theta) subset ker(theta^2) subset ..., reported top down: the
    /// first level is everything, the last is empty, and level i+1 collects
    /// summands whose longest outgoing path is shorter than (steps - i - 1).
    pub fn kernel_filtration(&self) -> Result<HiggsFiltration, HiggsError> {
        let lens = self.out_path_lengths()?;
        let e = lens.iter().copied().max().unwrap_or(0);
        let mut levels = Vec::with_capacity(e + 2);
        for bound in (0..=e + 1).rev() {
            levels.push(
                (0..self.rank())
                    .filter(|&v| lens[v] < bound)
                    .collect::<Vec<_>>(),
            );
        }
        Ok(HiggsFiltration { levels })
    }

    /// Decomposes a chain-sum diagram into its chains, each listed source to
    /// sink; chains are ordered by their first summand index.
    pub fn chain_partition(&self) -> Result<Vec<Vec<usize>>, HiggsError> {
        let n = self.rank();
        let mut next: Vec<Option<usize>> = vec![None; n];
        let mut has_prev = vec![false; n];
        for a in &self.arrows {
            if next[a.from].is_some() {
                return Err(HiggsError::NotChainSum(a.from));
            }
            next[a.from] = Some(a.to);
            if has_prev[a.to] {
                return Err(HiggsError::NotChainSum(a.to));
            }
            has_prev[a.to] = true;
        }
        let mut chains = Vec::new();
        let mut visited = vec![false; n];
        for (start, _) in has_prev.iter().enumerate().filter(|(_, &p)| !p) {
            let mut chain = Vec::new();
            let mut cur = Some(start);
            while let Some(v) = cur {
                visited[v] = true;
                chain.push(v);
                cur = next[v];
            }
            chains.push(chain);
        }
        if visited.iter().all(|&v| v) {
            Ok(chains)
        } else {
            Err(HiggsError::Cyclic)
        }
    }

    pub fn is_chain_sum(&self) -> bool {
        self.chain_partition().is_ok()
    }

    /// All theta-closed index subsets, including the empty and the full one.
    /// These are exactly the products of chain tails.
    pub fn invariant_subsets(&self) -> Result<Vec<Vec<usize>>, HiggsError> {
        let chains = self.chain_partition()?;
        let mut subsets = vec![Vec::new()];
        for chain in &chains {
            let mut grown = Vec::with_capacity(subsets.len() * (chain.len() + 1));
            for tail in 0..=chain.len() {
                for s in &subsets {
                    let mut t = s.clone();
                    t.extend_from_slice(&chain[chain.len() - tail..]);
                    grown.push(t);
                }
            }
            subsets = grown;
        }
        for s in &mut subsets {
            s.sort_unstable();
        }
        subsets.sort();
        subsets.dedup();
        Ok(subsets)
    }

    fn subset_slope(&self, indices: &[usize]) -> Rational64 {
        let deg: Rational64 = indices.iter().map(|&i| self.base.summand_degree(i)).sum();
        deg / Rational64::from_integer(indices.len() as i64)
    }

    /// Slope-maximal proper invariant subobject, or None when rank 1 leaves
    /// no candidates. Ties resolve to the smallest rank, then the
    /// lexicographically least index vector, making the witness canonical.
    pub fn max_proper_invariant_slope(&self) -> Result<Option<SubWitness>, HiggsError> {
        let mut best: Option<SubWitness> = None;
        for s in self.invariant_subsets()? {
            if s.is_empty() || s.len() == self.rank() {
                continue;
            }
            let slope = self.subset_slope(&s);
            let better = match &best {
                None => true,
                Some(b) => {
                    (slope, std::cmp::Reverse(s.len())) > (b.slope, std::cmp::Reverse(b.rank))
                        || (slope == b.slope && s.len() == b.rank && s < b.indices)
                }
            };
            if better {
                best = Some(SubWitness {
                    rank: s.len(),
                    slope,
                    indices: s,
                });
            }
        }
        Ok(best)
    }

    pub fn stability_verdict(&self) -> Result<StabilityVerdict, HiggsError> {
        let mu = self.slope();
        let best = self.max_proper_invariant_slope()?;
        let (status, witness) = match best {
            None => (StabilityStatus::Stable, None),
            Some(w) => {
                if w.slope > mu {
                    (StabilityStatus::Unstable, Some(w))
                } else if w.slope == mu {
                    (StabilityStatus::StrictlySemistable, Some(w))
                } else {
                    (StabilityStatus::Stable, None)
                }
            }
        };
        Ok(StabilityVerdict {
            status,
            slope: mu,
            witness,
        })
    }

    /// Restriction to a sorted index set, arrows both of whose ends survive.
    /// Works as a subobject on invariant sets and as a quotient on their
    /// complements, since dropped arrows are exactly those hitting the
    /// removed part.
    pub fn sub_object(&self, indices: &[usize]) -> Result<GradedHiggsBundle, HiggsError> {
        let mut pos = vec![None; self.rank()];
        for (new, &old) in indices.iter().enumerate() {
            pos[old] = Some(new);
        }
        let summands: Vec<LineClass> = indices
            .iter()
            .map(|&i| self.base.summands()[i].clone())
            .collect();
        let base = BundleSum::new(*self.context(), summands)?;
        let arrows = self
            .arrows
            .iter()
            .filter_map(|a| match (pos[a.from], pos[a.to]) {
                (Some(f), Some(t)) => Some(HiggsArrow { from: f, to: t }),
                _ => None,
            })
            .collect();
        Ok(GradedHiggsBundle { base, arrows })
    }

    /// True when the diagram splits into stable chains of one common slope.
    pub fn polystable_check(&self) -> Result<bool, HiggsError> {
        let chains = self.chain_partition()?;
        let mu = self.slope();
        for chain in &chains {
            let piece = self.sub_object(chain)?;
            if piece.slope() != mu || !piece.stability_verdict()?.is_stable() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Associated graded of a Jordan-Holder filtration: splits off a stable
    /// slope-mu subobject of minimal rank until everything is stable. The
    /// result is polystable with the same rank and degree. Unstable input is
    /// an error.
    pub fn s_equivalence_representative(&self) -> Result<GradedHiggsBundle, HiggsError> {
        let verdict = self.stability_verdict()?;
        match verdict.status {
            StabilityStatus::Unstable => Err(HiggsError::NotSemistable),
            StabilityStatus::Stable => Ok(self.clone()),
            StabilityStatus::StrictlySemistable => {
                let w = verdict.witness.expect("strictly semistable has a witness");
                let piece = self.sub_object(&w.indices)?;
                let complement: Vec<usize> = (0..self.rank())
                    .filter(|i| !w.indices.contains(i))
                    .collect();
                let rest = self
                    .sub_object(&complement)?
                    .s_equivalence_representative()?;
                piece.direct_sum(&rest)
            }
        }
    }

    pub fn tensor_line(&self, l: &LineClass) -> Result<GradedHiggsBundle, HiggsError> {
        Ok(GradedHiggsBundle {
            base: self.base.tensor_line(l)?,
            arrows: self.arrows.clone(),
        })
    }

    pub fn direct_sum(&self, other: &GradedHiggsBundle) -> Result<GradedHiggsBundle, HiggsError> {
        let base = self.base.direct_sum(&other.base)?;
        let shift = self.rank();
        let mut arrows = self.arrows.clone();
        arrows.extend(other.arrows.iter().map(|a| HiggsArrow {
            from: a.from + shift,
            to: a.to + shift,
        }));
        Ok(GradedHiggsBundle { base, arrows })
    }

    /// Tensor product with the product rule field theta(x) ox 1 + 1 ox
    /// theta(y). Summand (i, j) sits at index i * other.rank() + j; the
    /// result is a grid, not a chain-sum, whenever both factors have arrows.
    pub fn tensor(&self, other: &GradedHiggsBundle) -> Result<GradedHiggsBundle, HiggsError> {
        let base = self.base.tensor(&other.base)?;
        let r2 = other.rank();
        let mut arrows = Vec::new();
        for a in &self.arrows {
            for j in 0..r2 {
                arrows.push(HiggsArrow {
                    from: a.from * r2 + j,
                    to: a.to * r2 + j,
                });
            }
        }
        for b in &other.arrows {
            for i in 0..self.rank() {
                arrows.push(HiggsArrow {
                    from: i * r2 + b.from,
                    to: i * r2 + b.to,
                });
            }
        }
        Ok(GradedHiggsBundle { base, arrows })
    }

    /// Jordan type of the field with every arrow weight set to 1, computed
    /// from exact ranks of matrix powers. Partition parts come back in
    /// decreasing order and sum to the rank.
    pub fn jordan_type(&self) -> Result<Vec<usize>, HiggsError> {
        self.topological_order()?;
        let n = self.rank();
        let mut m = vec![vec![Rational64::zero(); n]; n];
        for a in &self.arrows {
            m[a.to][a.from] = Rational64::from_integer(1);
        }
        let mut ranks = vec![n];
        let mut power = m.clone();
        loop {
            let r = rational_rank(power.clone());
            ranks.push(r);
            if r == 0 {
                break;
            }
            power = mat_mul(&power, &m);
        }
        let parts_at_least = |k: usize| -> usize {
            if k < ranks.len() {
                ranks[k - 1] - ranks[k]
            } else {
                0
            }
        };
        let mut parts = Vec::new();
        for size in (1..ranks.len()).rev() {
            for _ in 0..parts_at_least(size).saturating_sub(parts_at_least(size + 1)) {
                parts.push(size);
            }
        }
        Ok(parts)
    }
}

impl<'de> Deserialize<'de> for GradedHiggsBundle {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            base: BundleSum,
            arrows: Vec<HiggsArrow>,
        }
        let raw = Raw::deserialize(de)?;
        GradedHiggsBundle::new(
            raw.base,
            raw.arrows.iter().map(|a| (a.from, a.to)).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

fn rational_rank(mut m: Vec<Vec<Rational64>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let pivot = match (rank..rows).find(|&r| !m[r][col].is_zero()) {
            Some(p) => p,
            None => continue,
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].recip();
        for x in m[rank][col..cols].iter_mut() {
            *x *= inv;
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col];
                for c in col..cols {
                    row[c] -= f * pivot_row[c];
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn mat_mul(a: &[Vec<Rational64>], b: &[Vec<Rational64>]) -> Vec<Vec<Rational64>> {
    let n = a.len();
    let mut c = vec![vec![Rational64::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// The m-th symmetric power of the uniformizing Higgs bundle: the chain
/// K^(m/2) -> K^(m/2 - 1) -> ... -> K^(-m/2) with every arrow an
/// isomorphism (delta = 0). Rank m + 1, degree 0; m = 0 gives (O, 0).
pub fn sym_uniformizing(ctx: CurveContext, m: u32) -> GradedHiggsBundle {
    let m = m as i64;
    let summands = (0..=m)
        .map(|i| LineClass::half_canonical_power(m - 2 * i))
        .collect();
    let base = BundleSum::new(ctx, summands).expect("m + 1 >= 1 summands");
    GradedHiggsBundle::chain(base)
}

/// Product of symmetric powers of the uniformizing bundle with its
/// decomposition into two smaller ones.
#[derive(Debug, Clone)]
pub struct ClebschGordan {
    /// sym(m - 1) tensor sym(1), a rank 2m grid.
    pub product: GradedHiggsBundle,
    /// sym(m), the top constituent.
    pub top: GradedHiggsBundle,
    /// sym(m - 2), the complement.
    pub complement: GradedHiggsBundle,
    /// Jordan type of the product field; equals [m + 1, m - 1].
    pub jordan: Vec<usize>,
}

/// Splits sym(m - 1) tensor sym(1) as sym(m) + sym(m - 2) and verifies the
/// split on ranks, degrees, and Jordan type before returning it.
pub fn clebsch_gordan_decompose(ctx: CurveContext, m: u32) -> Result<ClebschGordan, HiggsError> {
    if m < 2 {
        return Err(HiggsError::DecompositionTooSmall(m));
    }
    let product = sym_uniformizing(ctx, m - 1).tensor(&sym_uniformizing(ctx, 1))?;
    let top = sym_uniformizing(ctx, m);
    let complement = sym_uniformizing(ctx, m - 2);
    if top.rank() + complement.rank() != product.rank() {
        return Err(HiggsError::DecompositionMismatch("rank total".into()));
    }
    if top.degree() + complement.degree() != product.degree() {
        return Err(HiggsError::DecompositionMismatch("degree total".into()));
    }
    let jordan = product.jordan_type()?;
    if jordan != vec![m as usize + 1, m as usize - 1] {
        return Err(HiggsError::DecompositionMismatch(format!(
            "jordan type {:?}",
            jordan
        )));
    }
    Ok(ClebschGordan {
        product,
        top,
        complement,
        jordan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u32, g: u32) -> CurveContext {
        CurveContext::new(p, g).unwrap()
    }

    fn sum_of(ctx: CurveContext, degrees: &[i64]) -> BundleSum {
        BundleSum::new(
            ctx,
            degrees.iter().map(|&d| LineClass::of_degree(d)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn constructor_rejects_bad_arrows() {
        let b = sum_of(ctx(2, 2), &[0, 0]);
        assert_eq!(
            GradedHiggsBundle::new(b.clone(), vec![(0, 2)]).unwrap_err(),
            HiggsError::ArrowOutOfRange(2)
        );
        assert_eq!(
            GradedHiggsBundle::new(b, vec![(0, 1), (0, 1)]).unwrap_err(),
            HiggsError::DuplicateArrow { from: 0, to: 1 }
        );
    }

    #[test]
    fn validation_checks_delta_and_cycles() {
        let c = ctx(2, 2);
        let ok = GradedHiggsBundle::chain(
            BundleSum::new(
                c,
                vec![LineClass::canonical_power(1), LineClass::structure()],
            )
            .unwrap(),
        );
        assert_eq!(ok.arrow_delta(&ok.arrows()[0]), Rational64::zero());
        assert!(ok.validate().is_ok());

        let bad = GradedHiggsBundle::chain(sum_of(c, &[0, -3]));
        match bad.validate().unwrap_err() {
            HiggsError::NegativeDelta(v) => assert_eq!(v.len(), 1),
            other => panic!("expected delta violation, got {other:?}"),
        }

        let cyc = GradedHiggsBundle::new(sum_of(c, &[0, 0]), vec![(0, 1), (1, 0)]).unwrap();
        assert_eq!(cyc.validate().unwrap_err(), HiggsError::Cyclic);
    }

    #[test]
    fn exponents() {
        let c = ctx(5, 2);
        assert_eq!(sym_uniformizing(c, 1).nilpotency_exponent().unwrap(), 1);
        assert_eq!(sym_uniformizing(c, 4).nilpotency_exponent().unwrap(), 4);
        let z = GradedHiggsBundle::zero_field(sum_of(c, &[1, 2, 3]));
        assert_eq!(z.nilpotency_exponent().unwrap(), 0);
    }

    #[test]
    fn kernel_filtration_of_a_chain() {
        let c = ctx(2, 2);
        let h = GradedHiggsBundle::chain(sum_of(c, &[4, 2, 0]));
        let f = h.kernel_filtration().unwrap();
        assert_eq!(f.levels(), &[vec![0, 1, 2], vec![1, 2], vec![2], vec![]]);
        assert_eq!(f.steps(), 3);
        assert_eq!(f.graded_pieces(), vec![vec![0], vec![1], vec![2]]);

        let z = GradedHiggsBundle::zero_field(sum_of(c, &[0, 0]));
        let fz = z.kernel_filtration().unwrap();
        assert_eq!(fz.levels(), &[vec![0, 1], vec![]]);
        assert_eq!(fz.steps(), 1);
    }

    #[test]
    fn invariant_subset_counts() {
        let c = ctx(2, 2);
        let chain3 = GradedHiggsBundle::chain(sum_of(c, &[4, 2, 0]));
        assert_eq!(chain3.invariant_subsets().unwrap().len(), 4);

        let two_chains = GradedHiggsBundle::chains(sum_of(c, &[2, 0, 2, 0]), &[2, 2]).unwrap();
        assert_eq!(two_chains.invariant_subsets().unwrap().len(), 9);

        let zero = GradedHiggsBundle::zero_field(sum_of(c, &[0, 1, 2]));
        assert_eq!(zero.invariant_subsets().unwrap().len(), 8);
    }

    #[test]
    fn tails_are_the_only_invariants_of_a_chain() {
        let c = ctx(2, 2);
        let h = GradedHiggsBundle::chain(sum_of(c, &[4, 2, 0]));
        assert_eq!(
            h.invariant_subsets().unwrap(),
            vec![vec![], vec![0, 1, 2], vec![1, 2], vec![2]]
        );
    }

    #[test]
    fn stability_of_uniformizing_bundle() {
        let c = ctx(3, 2);
        let v = sym_uniformizing(c, 1).stability_verdict().unwrap();
        assert_eq!(v.status, StabilityStatus::Stable);
        assert_eq!(v.slope, Rational64::zero());
        assert!(v.witness.is_none());
    }

    #[test]
    fn extension_of_structure_sheaves_is_strictly_semistable() {
        let c = ctx(2, 2);
        let h = GradedHiggsBundle::chain(sum_of(c, &[0, 0]));
        let v = h.stability_verdict().unwrap();
        assert_eq!(v.status, StabilityStatus::StrictlySemistable);
        let w = v.witness.unwrap();
        assert_eq!(w.indices, vec![1]);
        assert_eq!(w.slope, Rational64::zero());
    }

    #[test]
    fn increasing_chain_is_unstable() {
        let c = ctx(2, 2);
        let h = GradedHiggsBundle::chain(sum_of(c, &[0, 2]));
        assert!(h.validate().is_ok());
        let v = h.stability_verdict().unwrap();
        assert_eq!(v.status, StabilityStatus::Unstable);
        assert_eq!(v.witness.unwrap().indices, vec![1]);
    }

    #[test]
    fn witness_prefers_smallest_rank() {
        let c = ctx(2, 2);
        let h = GradedHiggsBundle::zero_field(sum_of(c, &[1, 1, 0]));
        let w = h.max_proper_invariant_slope().unwrap().unwrap();
        assert_eq!(w.indices, vec![0]);
        assert_eq!(w.rank, 1);
        assert_eq!(w.slope, Rational64::from_integer(1));
    }

    #[test]
    fn polystability() {
        let c = ctx(2, 2);
        let pair = GradedHiggsBundle::zero_field(sum_of(c, &[0, 0]));
        assert!(pair.polystable_check().unwrap());

        let ext = GradedHiggsBundle::chain(sum_of(c, &[0, 0]));
        assert!(!ext.polystable_check().unwrap());

        let mixed = GradedHiggsBundle::zero_field(sum_of(c, &[0, 1]));
        assert!(!mixed.polystable_check().unwrap());

        let sym_split = sym_uniformizing(c, 3)
            .direct_sum(&sym_uniformizing(c, 1))
            .unwrap();
        assert!(sym_split.polystable_check().unwrap());
    }

    #[test]
    fn s_equivalence_splits_strictly_semistable() {
        let c = ctx(2, 2);
        let ext = GradedHiggsBundle::chain(sum_of(c, &[0, 0]));
        let gr = ext.s_equivalence_representative().unwrap();
        assert!(gr.arrows().is_empty());
        assert_eq!(gr.rank(), 2);
        assert_eq!(gr.degree(), Rational64::zero());
        assert!(gr.polystable_check().unwrap());

        let stable = sym_uniformizing(c, 2);
        assert_eq!(stable.s_equivalence_representative().unwrap(), stable);

        let unstable = GradedHiggsBundle::chain(sum_of(c, &[0, 2]));
        assert_eq!(
            unstable.s_equivalence_representative().unwrap_err(),
            HiggsError::NotSemistable
        );
    }

    #[test]
    fn twisting_preserves_verdicts() {
        let c = ctx(3, 2);
        let h = GradedHiggsBundle::chain(sum_of(c, &[3, 1, 0]));
        let t = h.tensor_line(&LineClass::twist("A", 5)).unwrap();
        assert_eq!(
            h.stability_verdict().unwrap().status,
            t.stability_verdict().unwrap().status
        );
        assert_eq!(t.slope() - h.slope(), Rational64::from_integer(5));
    }

    #[test]
    fn tensor_exponent_is_additive() {
        let c = ctx(5, 2);
        let a = sym_uniformizing(c, 2);
        let b = sym_uniformizing(c, 1);
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.nilpotency_exponent().unwrap(), 3);
        assert!(!t.is_chain_sum());
        assert_eq!(t.rank(), 6);
    }

    #[test]
    fn jordan_types() {
        let c = ctx(5, 2);
        assert_eq!(sym_uniformizing(c, 3).jordan_type().unwrap(), vec![4]);
        let z = GradedHiggsBundle::zero_field(sum_of(c, &[0, 0, 0]));
        assert_eq!(z.jordan_type().unwrap(), vec![1, 1, 1]);
        let grid = sym_uniformizing(c, 1)
            .tensor(&sym_uniformizing(c, 1))
            .unwrap();
        assert_eq!(grid.jordan_type().unwrap(), vec![3, 1]);
        let chains = GradedHiggsBundle::chains(sum_of(c, &[2, 0, 2, 0, 0]), &[2, 3]).unwrap();
        assert_eq!(chains.jordan_type().unwrap(), vec![3, 2]);
    }

    #[test]
    fn clebsch_gordan_small_cases() {
        let c = ctx(5, 2);
        for m in 2..=5u32 {
            let cg = clebsch_gordan_decompose(c, m).unwrap();
            assert_eq!(cg.product.rank(), 2 * m as usize);
            assert_eq!(cg.jordan, vec![m as usize + 1, m as usize - 1]);
            assert_eq!(
                cg.top.degree() + cg.complement.degree(),
                cg.product.degree()
            );
        }
        assert_eq!(
            clebsch_gordan_decompose(c, 1).unwrap_err(),
            HiggsError::DecompositionTooSmall(1)
        );
    }

    #[test]
    fn sym_uniformizing_shape() {
        let c = ctx(7, 3);
        let s = sym_uniformizing(c, 3);
        assert_eq!(s.rank(), 4);
        assert_eq!(s.degree(), Rational64::zero());
        for a in s.arrows() {
            assert_eq!(s.arrow_delta(a), Rational64::zero());
        }
        assert!(s.validate().is_ok());
        let trivial = sym_uniformizing(c, 0);
        assert_eq!(trivial.rank(), 1);
        assert!(trivial.arrows().is_empty());
    }
}
