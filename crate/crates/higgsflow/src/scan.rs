//! Parameter sweeps: the subsheaf case inequality and chain stability over
//! a (p, g, ell) grid, and the pushforward slope gaps.
//!
//! Row builders come in a default flavor, which uses the data-parallel map
//! when the `parallel` feature is on, and an explicitly sequential flavor
//! for comparison.

use num_rational::Rational64;
use serde::Serialize;

use crate::constructions::{
    case_bound, reduced_case_expression, verify_blocking_stability, BlockingParams,
    ConstructionError,
};
use crate::curve::CurveContext;
use crate::frac::frac_string;
use crate::frobenius::sun_slope_gap;
use crate::par::map_vec;
use crate::report::Claim;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepConfig {
    pub primes: Vec<u32>,
    pub genera: Vec<u32>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            primes: vec![2, 3, 5, 7],
            genera: (2..=6).collect(),
        }
    }
}

/// One point of the case-inequality sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub p: u32,
    pub g: u32,
    pub ell: i64,
    pub n: i64,
    pub d_l: i64,
    #[serde(with = "crate::frac")]
    pub bound: Rational64,
    pub reduced: i64,
    pub nonnegative: bool,
    pub equality: bool,
}

/// Chain stability at one grid point; the exponent of the chain is always
/// the prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityRow {
    pub p: u32,
    pub g: u32,
    pub ell: i64,
    pub stable: bool,
    pub exponent: usize,
}

/// Slope gap mu_r - mu of a rank-r subsheaf of a pushforward of a line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlopeGapRow {
    pub p: u32,
    pub g: u32,
    pub r: u32,
    #[serde(with = "crate::frac")]
    pub gap: Rational64,
}

/// All (context, ell, n) tuples of a config, ell over 1..=2g-2 and n over
/// the proper subsheaf ranks 1..=p-1.
pub fn sweep_grid(cfg: &SweepConfig) -> Result<Vec<(CurveContext, i64, i64)>, ConstructionError> {
    let mut grid = Vec::new();
    for &p in &cfg.primes {
        for &g in &cfg.genera {
            let ctx = CurveContext::new(p, g)?;
            ctx.require_genus_at_least(2)?;
            for ell in 1..=ctx.canonical_degree() {
                for n in 1..p as i64 {
                    grid.push((ctx, ell, n));
                }
            }
        }
    }
    Ok(grid)
}

fn case_row(ctx: &CurveContext, ell: i64, n: i64) -> Result<SweepRow, ConstructionError> {
    let params = BlockingParams::new(ctx, ell)?;
    let reduced = reduced_case_expression(&params, n);
    Ok(SweepRow {
        p: params.p,
        g: params.g,
        ell,
        n,
        d_l: params.d_l,
        bound: case_bound(&params, n),
        reduced,
        nonnegative: reduced >= 0,
        equality: reduced == 0,
    })
}

pub fn case_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>, ConstructionError> {
    let grid = sweep_grid(cfg)?;
    map_vec(grid, |(ctx, ell, n)| case_row(&ctx, ell, n))
        .into_iter()
        .collect()
}

pub fn case_rows_sequential(cfg: &SweepConfig) -> Result<Vec<SweepRow>, ConstructionError> {
    sweep_grid(cfg)?
        .into_iter()
        .map(|(ctx, ell, n)| case_row(&ctx, ell, n))
        .collect()
}

pub fn stability_rows(cfg: &SweepConfig) -> Result<Vec<StabilityRow>, ConstructionError> {
    let mut grid = Vec::new();
    for &p in &cfg.primes {
        for &g in &cfg.genera {
            let ctx = CurveContext::new(p, g)?;
            ctx.require_genus_at_least(2)?;
            for ell in 1..=ctx.canonical_degree() {
                grid.push((ctx, ell));
            }
        }
    }
    map_vec(grid, |(ctx, ell)| {
        let proof = verify_blocking_stability(&ctx, ell)?;
        Ok(StabilityRow {
            p: ctx.prime(),
            g: ctx.genus(),
            ell,
            stable: proof.stable,
            exponent: ctx.prime() as usize,
        })
    })
    .into_iter()
    .collect()
}

pub fn slope_gap_rows(cfg: &SweepConfig) -> Result<Vec<SlopeGapRow>, ConstructionError> {
    let mut rows = Vec::new();
    for &p in &cfg.primes {
        for &g in &cfg.genera {
            let ctx = CurveContext::new(p, g)?;
            for r in 1..=p {
                rows.push(SlopeGapRow {
                    p,
                    g,
                    r,
                    gap: sun_slope_gap(&ctx, r as usize)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Summarizes a case sweep: every reduced value nonnegative, and equality
/// exactly at n = 1, ell = 2g - 2 for each (p, g).
pub fn sweep_claims(rows: &[SweepRow]) -> Vec<Claim> {
    let violations = rows.iter().filter(|r| !r.nonnegative).count();
    let equality_ok = rows
        .iter()
        .all(|r| r.equality == (r.n == 1 && r.ell == 2 * (r.g as i64 - 1)));
    vec![
        Claim::computed("case inequality holds on the grid")
            .with("rows", rows.len())
            .with("violations", violations)
            .check(violations == 0),
        Claim::computed("equality locus is n = 1, ell = 2g - 2").check(equality_ok),
    ]
}

pub fn stability_claims(rows: &[StabilityRow]) -> Vec<Claim> {
    let unstable = rows.iter().filter(|r| !r.stable).count();
    vec![Claim::computed("blocking chain stable on the grid")
        .with("rows", rows.len())
        .with("unstable", unstable)
        .check(unstable == 0)]
}

/// Plain CSV rendering for sweep output files.
pub trait CsvRow {
    fn csv_header() -> &'static str;
    fn csv_line(&self) -> String;
}

impl CsvRow for SweepRow {
    fn csv_header() -> &'static str {
        "p,g,ell,n,d_l,bound,reduced,nonnegative,equality"
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.p,
            self.g,
            self.ell,
            self.n,
            self.d_l,
            frac_string(self.bound),
            self.reduced,
            self.nonnegative,
            self.equality
        )
    }
}

impl CsvRow for StabilityRow {
    fn csv_header() -> &'static str {
        "p,g,ell,stable,exponent"
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.p, self.g, self.ell, self.stable, self.exponent
        )
    }
}

impl CsvRow for SlopeGapRow {
    fn csv_header() -> &'static str {
        "p,g,r,gap"
    }

    fn csv_line(&self) -> String {
        format!("{},{},{},{}", self.p, self.g, self.r, frac_string(self.gap))
    }
}

pub fn to_csv<R: CsvRow>(rows: &[R]) -> String {
    let mut out = String::from(R::csv_header());
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig {
            primes: vec![2, 3],
            genera: vec![2, 3],
        }
    }

    #[test]
    fn case_sweep_matches_sequential() {
        let cfg = small();
        let par = case_rows(&cfg).unwrap();
        let seq = case_rows_sequential(&cfg).unwrap();
        assert_eq!(par, seq);
        assert!(!par.is_empty());
        let claims = sweep_claims(&par);
        assert!(claims.iter().all(|c| c.ok), "{claims:?}");
    }

    #[test]
    fn grid_size_is_sum_over_primes() {
        // per (p, g): (2g - 2) ells times (p - 1) subsheaf ranks
        let rows = case_rows(&small()).unwrap();
        let expected: usize = [2u32, 3]
            .iter()
            .flat_map(|&p| {
                [2u32, 3]
                    .iter()
                    .map(move |&g| (2 * g as usize - 2) * (p as usize - 1))
            })
            .sum();
        assert_eq!(rows.len(), expected);
    }

    #[test]
    fn stability_sweep_is_all_stable() {
        let rows = stability_rows(&small()).unwrap();
        assert!(rows.iter().all(|r| r.stable));
        assert!(stability_claims(&rows).iter().all(|c| c.ok));
    }

    #[test]
    fn slope_gaps_are_nonpositive_and_vanish_at_full_rank() {
        let rows = slope_gap_rows(&small()).unwrap();
        for row in &rows {
            assert!(row.gap <= Rational64::from_integer(0));
            assert_eq!(row.gap == Rational64::from_integer(0), row.r == row.p);
        }
    }

    #[test]
    fn csv_round() {
        let rows = slope_gap_rows(&SweepConfig {
            primes: vec![3],
            genera: vec![2],
        })
        .unwrap();
        let csv = to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("p,g,r,gap"));
        assert_eq!(lines.next(), Some("3,2,1,-2/3"));
    }
}
