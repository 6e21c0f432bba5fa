//! Seeded generation of random valid chain-sums for oracle comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::CurveContext;
use crate::higgs::GradedHiggsBundle;
use crate::sheaf::{BundleSum, LineClass};

#[derive(Debug, Clone, Copy)]
pub struct SampleConfig {
    pub count: usize,
    /// Total summands per case, capped by the enumeration limit.
    pub max_summands: usize,
    /// Inclusive degree range for every summand.
    pub degree_range: (i64, i64),
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 200,
            max_summands: super::MAX_ENUM_RANK,
            degree_range: (-4, 4),
            seed: 0,
        }
    }
}

/// Random chain-sums with valid arrows. Down a chain, each degree stays
/// within 2g - 2 of its predecessor from below, which is exactly the
/// nonnegative-delta constraint, so every sample passes validation.
pub fn random_chain_sums(ctx: CurveContext, cfg: &SampleConfig) -> Vec<GradedHiggsBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = cfg.degree_range;
    assert!(lo <= hi, "empty degree range");
    let drop = ctx.canonical_degree().max(0);
    let mut out = Vec::with_capacity(cfg.count);
    while out.len() < cfg.count {
        let n = rng.random_range(1..=cfg.max_summands);
        let mut lengths = Vec::new();
        let mut left = n;
        while left > 0 {
            let len = rng.random_range(1..=left);
            lengths.push(len);
            left -= len;
        }
        let mut degrees = Vec::with_capacity(n);
        for &len in &lengths {
            let mut d = rng.random_range(lo..=hi);
            degrees.push(d);
            for _ in 1..len {
                d = rng.random_range((d - drop).max(lo)..=hi);
                degrees.push(d);
            }
        }
        let base = BundleSum::new(
            ctx,
            degrees.iter().map(|&d| LineClass::of_degree(d)).collect(),
        )
        .expect("n >= 1");
        let h = GradedHiggsBundle::chains(base, &lengths).expect("lengths sum to n");
        debug_assert!(h.validate().is_ok());
        out.push(h);
    }
    out
}
