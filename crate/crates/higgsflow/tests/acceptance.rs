//! Acceptance gate: one test per criterion, one pass/fail line each.
//!
//! Run with `cargo test --test acceptance`. Every test prints its verdict
//! line; the harness adds one ok/FAILED line per criterion as well.

use num_rational::Rational64;

use higgsflow::constructions::{
    blocking_higgs_term, extension_count_comparison, semistable_not_strongly, tensor_counterexample,
};
use higgsflow::curve::CurveContext;
use higgsflow::flow::{
    run_flow, strong_semistability_verdict, Assumptions, FlowOutcome, HiggsObject, OpaqueHiggs,
    OpaqueSource, StrongVerdict,
};
use higgsflow::frac::parse_frac;
use higgsflow::frobenius::{
    canonical_graded, canonical_vs_hn, cartier_descent_degree, pullback_line, sun_slope_gap,
    PushforwardBundle, StabilityFlag,
};
use higgsflow::higgs::{clebsch_gordan_decompose, sym_uniformizing, GradedHiggsBundle};
use higgsflow::oracle::sampling::{random_chain_sums, SampleConfig};
use higgsflow::oracle::{
    batch_destabilizer_agreement, check_destabilizer_agreement, jordan_type_bruteforce,
};
use higgsflow::scan::{case_rows, case_rows_sequential, stability_rows, sweep_claims, SweepConfig};
use higgsflow::sheaf::{BundleSum, LineClass};

fn ctx(p: u32, g: u32) -> CurveContext {
    CurveContext::new(p, g).unwrap()
}

fn rat(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn expect_not_strongly(term: &HiggsObject, a: &Assumptions, exponent: usize) {
    match strong_semistability_verdict(term, a).unwrap() {
        StrongVerdict::NotStronglySemistable { certificate } => {
            assert_eq!(certificate.exponent, exponent);
            assert!(certificate.polystable_verified);
        }
        other => panic!("expected a blocking certificate, got {other:?}"),
    }
}

#[test]
fn criterion_01_case_inequality_sweep() {
    let cfg = SweepConfig::default();
    assert_eq!(cfg.primes, vec![2, 3, 5, 7]);
    assert_eq!(cfg.genera, vec![2, 3, 4, 5, 6]);
    let rows = case_rows(&cfg).unwrap();
    assert_eq!(rows, case_rows_sequential(&cfg).unwrap());
    for row in &rows {
        assert!(row.reduced >= 0, "{row:?}");
        let at_locus = row.n == 1 && row.ell == 2 * (row.g as i64 - 1);
        assert_eq!(row.equality, at_locus, "{row:?}");
    }
    let equalities = rows.iter().filter(|r| r.equality).count();
    assert_eq!(equalities, cfg.primes.len() * cfg.genera.len());
    assert!(sweep_claims(&rows).iter().all(|c| c.ok));
    let stab = stability_rows(&cfg).unwrap();
    assert!(stab.iter().all(|r| r.stable));
    println!("criterion 01 (case inequality and chain stability sweep): pass");
}

#[test]
fn criterion_02_blocking_transform_on_the_grid() {
    let a = Assumptions::default();
    let term = blocking_higgs_term(&ctx(2, 2), 2).unwrap();
    assert_eq!(term.rank(), 3);
    assert_eq!(term.degree(), rat(3));
    expect_not_strongly(&term, &a, 2);

    for p in [2u32, 3, 5, 7] {
        for g in 2u32..=6 {
            let c = ctx(p, g);
            for ell in 1..=c.canonical_degree() {
                let term = blocking_higgs_term(&c, ell).unwrap();
                assert_eq!(term.rank(), p as usize + 1);
                assert!(term.is_semistable().unwrap());
                assert!(term.exponent().unwrap() < p as usize);
                expect_not_strongly(&term, &a, p as usize);
            }
        }
    }
    println!("criterion 02 (rank p+1 transform blocks with exponent p): pass");
}

#[test]
fn criterion_03_every_rank_above_p() {
    let c = ctx(2, 2);
    let a = Assumptions::default();
    for rank in 3..=10 {
        let t = semistable_not_strongly(&c, rank).unwrap();
        assert_eq!(t.rank, rank);
        assert_eq!(t.slope, rat(1));
        assert!(t.object.is_semistable().unwrap());
        assert!(t.object.exponent().unwrap() <= 1);
        match strong_semistability_verdict(&t.object, &a).unwrap() {
            StrongVerdict::NotStronglySemistable { certificate } => {
                assert_eq!(certificate.exponent, 2);
                assert_eq!(certificate.graded.rank(), rank);
                assert!(certificate.polystable_verified);
            }
            other => panic!("rank {rank}: {other:?}"),
        }
    }
    println!("criterion 03 (semistable not strongly in every rank 3..=10): pass");
}

#[test]
fn criterion_04_uniformizing_chains_stable() {
    for p in [2u32, 3] {
        for g in 2u32..=5 {
            let c = ctx(p, g);
            for m in 1..=12u32 {
                let chain = sym_uniformizing(c, m);
                assert_eq!(chain.rank(), m as usize + 1);
                assert_eq!(chain.degree(), rat(0));
                let verdict = chain.stability_verdict().unwrap();
                assert!(verdict.is_stable(), "p={p} g={g} m={m}");
                if m <= 4 {
                    for q in [2u32, 3] {
                        let record = check_destabilizer_agreement(&chain, q).unwrap();
                        assert!(record.agree, "p={p} g={g} m={m} q={q}: {record:?}");
                    }
                }
            }
        }
    }
    println!("criterion 04 (symmetric-power chains stable, oracle agrees): pass");
}

#[test]
fn criterion_05_clebsch_gordan_splits() {
    let c = ctx(3, 2);
    for m in 2..=8u32 {
        let cg = clebsch_gordan_decompose(c, m).unwrap();
        assert_eq!(cg.jordan, vec![m as usize + 1, m as usize - 1]);
        assert_eq!(cg.product.rank(), 2 * m as usize);
        assert_eq!(cg.product.degree(), rat(0));
        assert_eq!(cg.top, sym_uniformizing(c, m));
        assert_eq!(cg.complement, sym_uniformizing(c, m - 2));
        let split = cg.top.direct_sum(&cg.complement).unwrap();
        assert!(split.polystable_check().unwrap());
        assert_eq!(split.nilpotency_exponent().unwrap(), m as usize);
        if cg.product.rank() <= 12 {
            assert_eq!(jordan_type_bruteforce(&cg.product, 2).unwrap(), cg.jordan);
        }
    }
    println!("criterion 05 (product of symmetric powers splits as expected): pass");
}

#[test]
fn criterion_06_tensor_counterexamples() {
    let plain = Assumptions::default();
    for g in [2u32, 3] {
        let c = ctx(2, g);
        let t = tensor_counterexample(&c, &plain).unwrap();
        assert!(t.claims.iter().all(|cl| cl.ok), "{:?}", t.claims);
        assert_eq!(t.grid_jordan, vec![3, 1]);
        assert!(matches!(
            strong_semistability_verdict(&t.first, &plain).unwrap(),
            StrongVerdict::StronglySemistable { .. }
        ));
        assert!(matches!(
            strong_semistability_verdict(&t.second, &plain).unwrap(),
            StrongVerdict::StronglySemistable { .. }
        ));
        expect_not_strongly(&t.product, &plain, 2);
    }

    let generic = Assumptions {
        generic_curve: true,
    };
    let c = ctx(3, 2);
    let t = tensor_counterexample(&c, &generic).unwrap();
    assert!(t.claims.iter().all(|cl| cl.ok), "{:?}", t.claims);
    assert_eq!(t.grid_jordan, vec![4, 2]);
    assert!(matches!(
        strong_semistability_verdict(&t.first, &generic).unwrap(),
        StrongVerdict::StronglySemistable { .. }
    ));
    assert!(matches!(
        strong_semistability_verdict(&t.second, &generic).unwrap(),
        StrongVerdict::StronglySemistable { .. }
    ));
    expect_not_strongly(&t.product, &generic, 3);
    println!("criterion 06 (strong semistability lost under tensor product): pass");
}

#[test]
fn criterion_07_frobenius_ledger() {
    for p in [2u32, 3, 5] {
        for g in 1u32..=4 {
            let c = ctx(p, g);
            for d in -6i64..=6 {
                let line = LineClass::of_degree(d);
                let push = PushforwardBundle::new(c, line.clone()).unwrap();
                assert_eq!(push.rank(), p as usize);
                assert_eq!(push.degree(), rat(d + (p as i64 - 1) * (g as i64 - 1)));
                assert_eq!(
                    push.stability(),
                    if g >= 2 {
                        StabilityFlag::Stable
                    } else {
                        StabilityFlag::Semistable
                    }
                );
                let graded = canonical_graded(c, &line).unwrap();
                assert_eq!(graded.rank(), p as usize);
                assert_eq!(graded.degree(), push.degree() * rat(p as i64));
                assert_eq!(graded.nilpotency_exponent().unwrap(), p as usize - 1);
                assert_eq!(
                    cartier_descent_degree(&c, graded.degree()).unwrap(),
                    push.degree()
                );
                let cmp = canonical_vs_hn(c, &line).unwrap();
                assert_eq!(cmp.matches_chain_order, g >= 2 || p == 1);
                let pulled = pullback_line(&c, &line);
                assert_eq!(pulled.degree(&c), rat(d * p as i64));
            }
            // the weight-zero pushforward really has degree zero
            let zero =
                PushforwardBundle::new(c, LineClass::half_canonical_power(1 - p as i64)).unwrap();
            assert_eq!(zero.degree(), rat(0));
            // slope gap closes exactly at full rank
            for r in 1..=p as usize {
                let gap = sun_slope_gap(&c, r).unwrap();
                assert!(gap <= rat(0));
                assert_eq!(gap == rat(0), r == p as usize || g == 1);
            }
        }
    }
    println!("criterion 07 (pushforward and pullback degree ledger): pass");
}

#[test]
fn criterion_08_flows() {
    // doubling flow on a slope-one pair, ten steps
    let c = ctx(2, 2);
    let pair = BundleSum::new(c, vec![LineClass::of_degree(1), LineClass::of_degree(1)]).unwrap();
    let start = HiggsObject::Graded(GradedHiggsBundle::zero_field(pair));
    let trace = run_flow(&start, 10, &Assumptions::default()).unwrap();
    assert!(matches!(
        trace.outcome,
        FlowOutcome::Completed { steps: 10 }
    ));
    for step in &trace.steps {
        let flat_degree = parse_frac(&step.flat.degree).unwrap();
        assert_eq!(flat_degree, rat(2i64.pow(step.index as u32 + 1)));
        assert_eq!(step.semistable, Some(true));
    }

    // genus-one flow stays semistable with the trivial regrading
    let e = ctx(5, 1);
    let elliptic = HiggsObject::Opaque(OpaqueHiggs {
        context: e,
        rank: 2,
        degree: rat(0),
        exponent: 0,
        stability: StabilityFlag::Semistable,
        citation: "assumed semistable input".into(),
        source: OpaqueSource::ZeroHiggsField,
    });
    let trace = run_flow(&elliptic, 10, &Assumptions::default()).unwrap();
    assert!(matches!(
        trace.outcome,
        FlowOutcome::Completed { steps: 10 }
    ));
    assert!(trace.steps.iter().all(|s| s.semistable == Some(true)));

    // the blocking term stops the flow at once, with a certificate
    let term = blocking_higgs_term(&ctx(3, 2), 1).unwrap();
    let trace = run_flow(&term, 4, &Assumptions::default()).unwrap();
    match trace.outcome {
        FlowOutcome::Blocked { at_step, .. } => assert_eq!(at_step, 1),
        other => panic!("expected a block, got {other:?}"),
    }
    let cert = trace.certificate.expect("certificate");
    assert_eq!(cert.exponent, 3);
    assert!(cert.polystable_verified);
    println!("criterion 08 (flow traces: doubling, elliptic, blocked): pass");
}

#[test]
fn criterion_09_oracle_equivalence() {
    // frozen seed; 200 sampled chain-sums of rank <= 5, degrees in [-4, 4]
    let cfg = SampleConfig {
        count: 200,
        seed: 2024,
        ..SampleConfig::default()
    };
    let cases = random_chain_sums(ctx(3, 2), &cfg);
    assert_eq!(cases.len(), 200);
    let records = batch_destabilizer_agreement(cases, 3).unwrap();
    assert!(records.iter().all(|r| r.agree));

    // Jordan types of tensor grids up to rank 8, two independent routes
    let c = ctx(3, 2);
    for a in 1..=4usize {
        for b in a..=4usize {
            if a * b > 8 {
                continue;
            }
            let grid = sym_uniformizing(c, a as u32 - 1)
                .tensor(&sym_uniformizing(c, b as u32 - 1))
                .unwrap();
            let expected: Vec<usize> = (0..a.min(b)).map(|i| a + b - 1 - 2 * i).collect();
            assert_eq!(grid.jordan_type().unwrap(), expected);
            assert_eq!(jordan_type_bruteforce(&grid, 1).unwrap(), expected);
            assert_eq!(jordan_type_bruteforce(&grid, 2).unwrap(), expected);
        }
    }
    println!("criterion 09 (subset searches agree with brute-force oracles): pass");
}

#[test]
fn criterion_10_extension_counts() {
    for g in 1u32..=10 {
        let cmp = extension_count_comparison(&ctx(2, g)).unwrap();
        assert_eq!(cmp.lhs, 3 * g as i64 - 1);
        assert_eq!(cmp.rhs, 4 * g as i64 - 2);
        assert_eq!(cmp.strict, g >= 2);
        assert!(cmp.claims.iter().all(|c| c.ok));
    }
    println!("criterion 10 (extension parameter counts 3g-1 < 4g-2): pass");
}
