//! Independent cross-checks for the subset stability model.
//!
//! The main library decides stability by searching summand subsets. This
//! module re-derives the same quantities from first principles: it
//! enumerates all theta-invariant subspaces of the generic fiber over a
//! small finite field and bounds subsheaf degrees by coordinate projections,
//! and it recomputes Jordan types by fraction-free integer elimination.
//! Nothing here calls into the subset search, so agreement is evidence, not
//! tautology.
//!
//! Hard limits keep enumeration exact and fast: rank at most 5 and fields
//! F_2, F_3, F_5 for the subspace walk, rank at most 12 for Jordan types.

pub mod sampling;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::higgs::{GradedHiggsBundle, HiggsError};
use crate::par::map_vec;

pub const MAX_ENUM_RANK: usize = 5;
pub const ENUM_FIELDS: [u32; 3] = [2, 3, 5];
pub const MAX_JORDAN_RANK: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("rank {0} exceeds the exhaustive enumeration limit {MAX_ENUM_RANK}")]
    RankTooLarge(usize),
    #[error("field size {0} is not one of 2, 3, 5")]
    UnsupportedField(u32),
    #[error("rank {0} exceeds the Jordan cross-check limit {MAX_JORDAN_RANK}")]
    JordanRankTooLarge(usize),
    #[error(transparent)]
    Higgs(#[from] HiggsError),
}

/// Row-reduced basis of a subspace of F_q^n; rows are the canonical RREF
/// basis, so equal subspaces compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    pub basis: Vec<Vec<u32>>,
    pub dim: usize,
}

fn inv_mod(a: u32, q: u32) -> u32 {
    // q is prime and a nonzero mod q
    let mut r = 1u64;
    let mut base = (a % q) as u64;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % q as u64;
        }
        base = base * base % q as u64;
        e >>= 1;
    }
    r as u32
}

/// In-place row reduction mod q; returns the rank. Zero rows sink to the
/// bottom and are dropped by callers that want a basis.
fn rref_mod(m: &mut [Vec<u32>], q: u32) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let pivot = match (rank..rows).find(|&r| !m[r][col].is_multiple_of(q)) {
            Some(p) => p,
            None => continue,
        };
        m.swap(rank, pivot);
        let inv = inv_mod(m[rank][col], q);
        for x in m[rank].iter_mut() {
            *x = *x * inv % q;
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[col].is_multiple_of(q) {
                let f = row[col];
                for (x, pv) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + q * q - f * pv % q) % q;
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

fn rank_mod(mut m: Vec<Vec<u32>>, q: u32) -> usize {
    rref_mod(&mut m, q)
}

fn check_field(q: u32) -> Result<(), OracleError> {
    if ENUM_FIELDS.contains(&q) {
        Ok(())
    } else {
        Err(OracleError::UnsupportedField(q))
    }
}

/// Every subspace of F_q^n exactly once, via its RREF normal form: choose
/// pivot columns, then free entries right of each pivot outside pivot
/// columns.
pub fn enumerate_subspaces(n: usize, q: u32) -> Result<Vec<Subspace>, OracleError> {
    check_field(q)?;
    if n > MAX_ENUM_RANK {
        return Err(OracleError::RankTooLarge(n));
    }
    let mut out = vec![Subspace {
        basis: Vec::new(),
        dim: 0,
    }];
    for dim in 1..=n {
        for pivots in subsets_of_size(n, dim) {
            let mut free_slots = Vec::new();
            for (r, &pc) in pivots.iter().enumerate() {
                for c in pc + 1..n {
                    if !pivots.contains(&c) {
                        free_slots.push((r, c));
                    }
                }
            }
            let mut assignment = vec![0u32; free_slots.len()];
            loop {
                let mut basis = vec![vec![0u32; n]; dim];
                for (r, &pc) in pivots.iter().enumerate() {
                    basis[r][pc] = 1;
                }
                for (slot, &(r, c)) in free_slots.iter().enumerate() {
                    basis[r][c] = assignment[slot];
                }
                out.push(Subspace { basis, dim });
                // odometer step over F_q^free
                let mut k = 0;
                loop {
                    if k == assignment.len() {
                        break;
                    }
                    assignment[k] += 1;
                    if assignment[k] < q {
                        break;
                    }
                    assignment[k] = 0;
                    k += 1;
                }
                if k == assignment.len() {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Arrow matrix of the field over F_q: entry (to, from) = scalar.
fn field_matrix(h: &GradedHiggsBundle, q: u32, scalar: u32) -> Vec<Vec<u32>> {
    let n = h.rank();
    let mut m = vec![vec![0u32; n]; n];
    for a in h.arrows() {
        m[a.to][a.from] = scalar % q;
    }
    m
}

fn member_of(span: &Subspace, v: &[u32], q: u32) -> bool {
    let mut rows = span.basis.clone();
    rows.push(v.to_vec());
    rank_mod(rows, q) == span.dim
}

/// True when the matrix maps the subspace into itself.
pub fn is_invariant(space: &Subspace, m: &[Vec<u32>], q: u32) -> bool {
    let n = m.len();
    for b in &space.basis {
        let mut image = vec![0u32; n];
        for (i, row) in m.iter().enumerate() {
            let mut acc = 0u64;
            for (j, &e) in row.iter().enumerate() {
                acc += (e as u64) * (b[j] as u64);
            }
            image[i] = (acc % q as u64) as u32;
        }
        if !member_of(space, &image, q) {
            return false;
        }
    }
    true
}

/// Upper bound on the degree of a subsheaf with the given generic fiber.
/// Projection onto any r columns the fiber meets injectively is an
/// injective map of equal-rank sheaves, so each such column total bounds
/// the degree; the tightest is the smallest. Exact on coordinate
/// subspaces, where the only injective projection is onto the support.
pub fn degree_bound(h: &GradedHiggsBundle, space: &Subspace, q: u32) -> Rational64 {
    let r = space.dim;
    let mut best: Option<Rational64> = None;
    for cols in subsets_of_size(h.rank(), r) {
        let sub: Vec<Vec<u32>> = space
            .basis
            .iter()
            .map(|row| cols.iter().map(|&c| row[c]).collect())
            .collect();
        if rank_mod(sub, q) < r {
            continue;
        }
        let total: Rational64 = cols.iter().map(|&c| h.base().summand_degree(c)).sum();
        best = Some(match best {
            None => total,
            Some(b) => b.min(total),
        });
    }
    best.expect("a rank-r basis projects onto some r columns")
}

/// Best slope over proper nonzero invariant subspaces, with the dimension
/// of a smallest-dimensional maximizer. None when rank 1 admits none.
pub fn brute_force_max_destabilizer(
    h: &GradedHiggsBundle,
    q: u32,
    scalar: u32,
) -> Result<Option<(Rational64, usize)>, OracleError> {
    let n = h.rank();
    let m = field_matrix(h, q, scalar);
    let mut best: Option<(Rational64, usize)> = None;
    for space in enumerate_subspaces(n, q)? {
        if space.dim == 0 || space.dim == n || !is_invariant(&space, &m, q) {
            continue;
        }
        let slope = degree_bound(h, &space, q) / Rational64::from_integer(space.dim as i64);
        best = Some(match best {
            None => (slope, space.dim),
            Some((bs, bd)) => {
                if slope > bs || (slope == bs && space.dim < bd) {
                    (slope, space.dim)
                } else {
                    (bs, bd)
                }
            }
        });
    }
    Ok(best)
}

/// One destabilizer comparison: subset search versus subspace enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgreementRecord {
    pub rank: usize,
    pub subset_slope: Option<String>,
    pub subspace_slope: Option<String>,
    pub subset_rank: Option<usize>,
    pub subspace_dim: Option<usize>,
    pub agree: bool,
}

/// Compares the two destabilizer searches on one chain-sum. Agreement means
/// equal maximal slopes (or both absent); witness sets may differ.
pub fn check_destabilizer_agreement(
    h: &GradedHiggsBundle,
    q: u32,
) -> Result<AgreementRecord, OracleError> {
    let subset = h.max_proper_invariant_slope()?;
    let subspace = brute_force_max_destabilizer(h, q, 1)?;
    let agree = match (&subset, &subspace) {
        (None, None) => true,
        (Some(w), Some((s, _))) => w.slope == *s,
        _ => false,
    };
    Ok(AgreementRecord {
        rank: h.rank(),
        subset_slope: subset.as_ref().map(|w| crate::frac::frac_string(w.slope)),
        subspace_slope: subspace.map(|(s, _)| crate::frac::frac_string(s)),
        subset_rank: subset.map(|w| w.rank),
        subspace_dim: subspace.map(|(_, d)| d),
        agree,
    })
}

/// Destabilizer agreement over a batch, in input order.
pub fn batch_destabilizer_agreement(
    cases: Vec<GradedHiggsBundle>,
    q: u32,
) -> Result<Vec<AgreementRecord>, OracleError> {
    check_field(q)?;
    map_vec(cases, |h| check_destabilizer_agreement(&h, q))
        .into_iter()
        .collect()
}

/// Jordan type recomputed by Bareiss elimination over the integers, scalar
/// arrow weights. Scaling cannot change the type, so any nonzero scalar
/// must reproduce the rational-elimination answer.
pub fn jordan_type_bruteforce(
    h: &GradedHiggsBundle,
    scalar: i64,
) -> Result<Vec<usize>, OracleError> {
    let n = h.rank();
    if n > MAX_JORDAN_RANK {
        return Err(OracleError::JordanRankTooLarge(n));
    }
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for a in h.arrows() {
        m[a.to][a.from] = BigInt::from(scalar);
    }
    let mut ranks = vec![n];
    let mut power = m.clone();
    for _ in 0..=n {
        let r = bareiss_rank(power.clone());
        ranks.push(r);
        if r == 0 {
            break;
        }
        power = bigint_mat_mul(&power, &m);
    }
    if *ranks.last().unwrap() != 0 {
        return Err(OracleError::Higgs(HiggsError::Cyclic));
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

fn bigint_mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut c = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                let prod = &a[i][k] * &b[k][j];
                c[i][j] += prod;
            }
        }
    }
    c
}

/// Fraction-free Gaussian elimination; exact over Z, no rationals formed.
fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for col in 0..cols {
        let pivot = match (rank..rows).find(|&r| !m[r][col].is_zero()) {
            Some(p) => p,
            None => continue,
        };
        m.swap(rank, pivot);
        let pivot_val = m[rank][col].clone();
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let num = &pivot_val * &m[r][c] - &m[r][col] * &m[rank][c];
                m[r][c] = num / &prev;
            }
            m[r][col] = BigInt::zero();
        }
        prev = pivot_val.abs();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}
