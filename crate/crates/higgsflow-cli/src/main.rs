//! Command-line front end: verify the named constructions, sweep the
//! parameter grids, trace flows, and cross-check the oracles.
//!
//! Exit codes: 0 all checks passed, 1 a verification failed, 2 the request
//! could not be run at all.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use higgsflow::constructions::{
    blocking_flat, blocking_higgs_term, extension_count_comparison, semistable_not_strongly,
    tensor_counterexample,
};
use higgsflow::curve::CurveContext;
use higgsflow::flow::{
    run_flow, strong_semistability_verdict, Assumptions, FlowTrace, HiggsObject, StrongVerdict,
};
use higgsflow::higgs::GradedHiggsBundle;
use higgsflow::oracle::sampling::{random_chain_sums, SampleConfig};
use higgsflow::oracle::{batch_destabilizer_agreement, jordan_type_bruteforce};
use higgsflow::report::{validate_report, Claim, ClaimKind, Report};
use higgsflow::scan::{
    case_rows, slope_gap_rows, stability_claims, stability_rows, sweep_claims, to_csv, SweepConfig,
};
use higgsflow::sheaf::{BundleSum, LineClass};

#[derive(Parser)]
#[command(
    name = "higgsflow",
    version,
    about = "Exact stability and flow calculator for graded Higgs terms on curves in characteristic p"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check a named construction end to end
    Verify {
        #[command(subcommand)]
        target: Target,
    },
    /// Sweep the case inequality, chain stability, and slope gaps over a grid
    Scan {
        /// Primes to sweep; repeatable. Default 2 3 5 7
        #[arg(long = "p")]
        primes: Vec<u32>,
        /// Genera to sweep; repeatable. Default 2..=6
        #[arg(long = "g")]
        genera: Vec<u32>,
    },
    /// Trace the flow step by step from a chosen start
    Flow {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        g: u32,
        /// Start from the blocking term with this twist degree
        #[arg(long)]
        ell: Option<i64>,
        /// Start from the big-rank term of this rank
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Work on a generic curve; enables the periodic rank-2 regrading
        #[arg(long)]
        assume_generic: bool,
        /// Pass only if the flow blocks with an exponent certificate
        #[arg(long)]
        expect_blocked: bool,
    },
    /// Emit the blocking construction and its stability proof
    Construct {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        g: u32,
        #[arg(long)]
        ell: i64,
    },
    /// Compare the subset searches against brute-force enumeration over a
    /// finite field; seeded by HIGGSFLOW_SEED
    OracleCheck {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        g: u32,
        /// Number of sampled chain-sums
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

#[derive(Subcommand)]
enum Target {
    /// The rank p+1 term whose flow blocks at the first step
    Counterexample {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        g: u32,
        #[arg(long)]
        ell: i64,
    },
    /// The same phenomenon in any rank above p
    BigRank {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        g: u32,
        #[arg(long)]
        rank: usize,
    },
    /// Two strongly semistable terms with a product that is not
    Tensor {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        g: u32,
        /// Work on a generic curve; required for odd p
        #[arg(long)]
        assume_generic: bool,
    },
    /// Extension parameter counts 3g-1 against 4g-2
    Extension {
        #[arg(long)]
        g: u32,
        /// Characteristic; the counts do not depend on it
        #[arg(long, default_value_t = 2)]
        p: u32,
    },
}

struct Output {
    pass: bool,
    json: Value,
    text: String,
    csv: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&cli, &output) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    if output.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn emit(cli: &Cli, output: &Output) -> Result<()> {
    let rendered = match cli.format {
        Format::Text => output.text.clone(),
        Format::Json => serde_json::to_string_pretty(&output.json)? + "\n",
        Format::Csv => output.csv.clone(),
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, rendered)
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn run(command: &Command) -> Result<Output> {
    match command {
        Command::Verify { target } => verify(target),
        Command::Scan { primes, genera } => scan(primes, genera),
        Command::Flow {
            p,
            g,
            ell,
            rank,
            steps,
            assume_generic,
            expect_blocked,
        } => flow(
            *p,
            *g,
            *ell,
            *rank,
            *steps,
            *assume_generic,
            *expect_blocked,
        ),
        Command::Construct { p, g, ell } => construct(*p, *g, *ell),
        Command::OracleCheck { p, g, count } => oracle_check(*p, *g, *count),
    }
}

fn context(p: u32, g: u32) -> Result<CurveContext> {
    Ok(CurveContext::new(p, g)?)
}

fn report_output(report: Report) -> Result<Output> {
    validate_report(&report)?;
    Ok(Output {
        pass: report.pass,
        json: serde_json::to_value(&report)?,
        text: render_claims_text(&report),
        csv: render_claims_csv(&report.claims),
    })
}

fn verify(target: &Target) -> Result<Output> {
    match target {
        Target::Counterexample { p, g, ell } => {
            let ctx = context(*p, *g)?;
            let a = Assumptions::default();
            let built = blocking_flat(&ctx, *ell)?;
            let mut report = Report::new(json!({
                "verify": "counterexample", "p": p, "g": g, "ell": ell,
            }));
            report.extend(built.proof.claims.clone());
            let term = blocking_higgs_term(&ctx, *ell)?;
            report.push(
                Claim::computed("transform ledger")
                    .with("rank", term.rank())
                    .with("degree", higgsflow::frac::frac_string(term.degree()))
                    .check(term.rank() == *p as usize + 1),
            );
            report.push(not_strongly_claim(&term, &a, *p as usize)?);
            let trace = run_flow(&term, 1, &a)?;
            report.push(
                Claim::computed("flow blocks at the first step")
                    .check(trace.blocked() && trace.certificate.is_some()),
            );
            report_output(report)
        }
        Target::BigRank { p, g, rank } => {
            let ctx = context(*p, *g)?;
            let a = Assumptions::default();
            let built = semistable_not_strongly(&ctx, *rank)?;
            let mut report = Report::new(json!({
                "verify": "big-rank", "p": p, "g": g, "rank": rank,
            }));
            report.push(
                Claim::computed("term ledger")
                    .with("rank", built.rank)
                    .with("slope", higgsflow::frac::frac_string(built.slope))
                    .with("summands beyond the core", built.line_count)
                    .check(built.object.is_semistable()?),
            );
            report.push(not_strongly_claim(&built.object, &a, *p as usize)?);
            report_output(report)
        }
        Target::Tensor {
            p,
            g,
            assume_generic,
        } => {
            let ctx = context(*p, *g)?;
            let a = Assumptions {
                generic_curve: *assume_generic,
            };
            let t = tensor_counterexample(&ctx, &a)?;
            let mut report = Report::new(json!({
                "verify": "tensor", "p": p, "g": g, "assume_generic": assume_generic,
            }));
            report.extend(t.claims.clone());
            report.push(strongly_claim("first factor", &t.first, &a)?);
            report.push(strongly_claim("second factor", &t.second, &a)?);
            report.push(not_strongly_claim(&t.product, &a, *p as usize)?);
            report_output(report)
        }
        Target::Extension { g, p } => {
            let ctx = context(*p, *g)?;
            let cmp = extension_count_comparison(&ctx)?;
            let mut report = Report::new(json!({ "verify": "extension", "g": g }));
            report.extend(cmp.claims.clone());
            report.push(
                Claim::computed("strict from genus 2 on")
                    .with("strict", cmp.strict)
                    .check(cmp.strict == (*g >= 2)),
            );
            report_output(report)
        }
    }
}

/// Claim that a term is strongly semistable, by verdict.
fn strongly_claim(label: &str, term: &HiggsObject, a: &Assumptions) -> Result<Claim> {
    let verdict = strong_semistability_verdict(term, a)?;
    let ok = matches!(verdict, StrongVerdict::StronglySemistable { .. });
    let rule = match &verdict {
        StrongVerdict::StronglySemistable { rule } => rule.clone(),
        other => format!("{other:?}"),
    };
    Ok(Claim::computed(&format!("{label} is strongly semistable"))
        .with("rule", rule)
        .check(ok))
}

/// Claim that a term is not strongly semistable with an exponent
/// certificate at exactly the characteristic.
fn not_strongly_claim(term: &HiggsObject, a: &Assumptions, p: usize) -> Result<Claim> {
    let verdict = strong_semistability_verdict(term, a)?;
    match verdict {
        StrongVerdict::NotStronglySemistable { certificate } => {
            Ok(Claim::computed("not strongly semistable with certificate")
                .with("filtration", certificate.filtration_id.clone())
                .with("certificate exponent", certificate.exponent)
                .with("minimality", certificate.minimality_rule.clone())
                .check(certificate.polystable_verified && certificate.exponent == p))
        }
        other => Ok(Claim::computed("not strongly semistable with certificate")
            .with("verdict", format!("{other:?}"))
            .check(false)),
    }
}

fn scan(primes: &[u32], genera: &[u32]) -> Result<Output> {
    let mut cfg = SweepConfig::default();
    if !primes.is_empty() {
        cfg.primes = primes.to_vec();
    }
    if !genera.is_empty() {
        cfg.genera = genera.to_vec();
    }
    let rows = case_rows(&cfg)?;
    let stab = stability_rows(&cfg)?;
    let gaps = slope_gap_rows(&cfg)?;
    let mut claims = sweep_claims(&rows);
    claims.extend(stability_claims(&stab));
    let pass = claims.iter().all(|c| c.ok);
    let mut text = String::new();
    for c in &claims {
        text.push_str(&claim_line(c));
    }
    text.push_str(&format!(
        "rows: {} case, {} stability, {} slope gaps\npass: {pass}\n",
        rows.len(),
        stab.len(),
        gaps.len()
    ));
    Ok(Output {
        pass,
        json: json!({
            "config": cfg,
            "case_rows": rows,
            "stability_rows": stab,
            "slope_gaps": gaps,
            "claims": claims,
            "pass": pass,
        }),
        text,
        // CSV carries the primary sweep only
        csv: to_csv(&rows),
    })
}

fn flow(
    p: u32,
    g: u32,
    ell: Option<i64>,
    rank: Option<usize>,
    steps: usize,
    assume_generic: bool,
    expect_blocked: bool,
) -> Result<Output> {
    let ctx = context(p, g)?;
    let a = Assumptions {
        generic_curve: assume_generic,
    };
    let start = match (ell, rank) {
        (Some(_), Some(_)) => bail!("--ell and --rank select different starts; give one"),
        (Some(ell), None) => blocking_higgs_term(&ctx, ell)?,
        (None, Some(rank)) => semistable_not_strongly(&ctx, rank)?.object,
        (None, None) => HiggsObject::Graded(GradedHiggsBundle::zero_field(BundleSum::line(
            ctx,
            LineClass::structure(),
        ))),
    };
    let trace = run_flow(&start, steps, &a)?;
    let pass = trace.blocked() == expect_blocked;
    Ok(Output {
        pass,
        json: json!({
            "trace": trace,
            "expect_blocked": expect_blocked,
            "pass": pass,
        }),
        text: render_trace_text(&trace, expect_blocked, pass),
        csv: render_trace_csv(&trace),
    })
}

fn construct(p: u32, g: u32, ell: i64) -> Result<Output> {
    let ctx = context(p, g)?;
    let built = blocking_flat(&ctx, ell)?;
    let pass = built.proof.stable;
    let mut text = format!(
        "blocking construction p={p} g={g} ell={ell} (d_l={})\n",
        built.params.d_l
    );
    for (i, class) in built.graded.base().summands().iter().enumerate() {
        text.push_str(&format!(
            "  {i}: {} of degree {}\n",
            class.label(),
            higgsflow::frac::frac_string(class.degree(&ctx))
        ));
    }
    text.push_str(&format!(
        "rank {}, degree {}, exponent {}\nstable regrading: {}\n",
        built.graded.rank(),
        higgsflow::frac::frac_string(built.graded.degree()),
        built.graded.nilpotency_exponent()?,
        pass
    ));
    let mut csv = String::from("index,label,degree\n");
    for (i, class) in built.graded.base().summands().iter().enumerate() {
        csv.push_str(&format!(
            "{i},{},{}\n",
            csv_field(&class.label()),
            higgsflow::frac::frac_string(class.degree(&ctx))
        ));
    }
    Ok(Output {
        pass,
        json: json!({
            "params": built.params,
            "chain": built.graded,
            "proof": built.proof,
            "pass": pass,
        }),
        text,
        csv,
    })
}

fn oracle_check(p: u32, g: u32, count: usize) -> Result<Output> {
    let ctx = context(p, g)?;
    let seed = match std::env::var("HIGGSFLOW_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| anyhow!("HIGGSFLOW_SEED must be an unsigned integer, got {v:?}"))?,
        Err(_) => 0,
    };
    let cfg = SampleConfig {
        count,
        seed,
        ..SampleConfig::default()
    };
    let cases = random_chain_sums(ctx, &cfg);
    let q = 3;
    let records = batch_destabilizer_agreement(cases.clone(), q)?;
    let agree = records.iter().filter(|r| r.agree).count();
    let mut jordan_ok = 0usize;
    for h in &cases {
        if jordan_type_bruteforce(h, 2)? == h.jordan_type()? {
            jordan_ok += 1;
        }
    }
    let pass = agree == records.len() && jordan_ok == cases.len();
    let text = format!(
        "seed {seed}: {agree}/{} destabilizer agreements over F_{q}, {jordan_ok}/{} Jordan types match\npass: {pass}\n",
        records.len(),
        cases.len()
    );
    let mut csv = String::from("rank,subset_slope,subspace_slope,agree\n");
    for r in &records {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.rank,
            r.subset_slope.as_deref().unwrap_or("none"),
            r.subspace_slope.as_deref().unwrap_or("none"),
            r.agree
        ));
    }
    Ok(Output {
        pass,
        json: json!({
            "seed": seed,
            "field": q,
            "records": records,
            "jordan_agreements": jordan_ok,
            "cases": cases.len(),
            "pass": pass,
        }),
        text,
        csv,
    })
}

fn claim_line(c: &Claim) -> String {
    let mark = if c.ok { " ok " } else { "FAIL" };
    let source = match &c.kind {
        ClaimKind::Computed => String::new(),
        ClaimKind::Rule { source } => format!(" (rule: {source})"),
    };
    let values: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let tail = if values.is_empty() {
        String::new()
    } else {
        format!(" | {}", values.join(" "))
    };
    format!("[{mark}] {}{source}{tail}\n", c.label)
}

fn render_claims_text(report: &Report) -> String {
    let mut out = String::new();
    for c in &report.claims {
        out.push_str(&claim_line(c));
    }
    out.push_str(&format!("pass: {}\n", report.pass));
    out
}

fn render_claims_csv(claims: &[Claim]) -> String {
    let mut out = String::from("label,kind,source,ok,values\n");
    for c in claims {
        let (kind, source) = match &c.kind {
            ClaimKind::Computed => ("computed", String::new()),
            ClaimKind::Rule { source } => ("rule", source.clone()),
        };
        let values: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&c.label),
            kind,
            csv_field(&source),
            c.ok,
            csv_field(&values.join("; "))
        ));
    }
    out
}

fn render_trace_text(trace: &FlowTrace, expect_blocked: bool, pass: bool) -> String {
    let mut out = format!(
        "flow from {} term of rank {} degree {}\n",
        trace.start.kind, trace.start.rank, trace.start.degree
    );
    for s in &trace.steps {
        let mut to = match &s.term {
            Some(t) => format!(
                "term rank {} degree {} exponent {}",
                t.rank,
                t.degree,
                t.exponent.map_or("?".into(), |e| e.to_string())
            ),
            None => "no admissible term".to_string(),
        };
        if s.exponent_ok == Some(false) {
            to.push_str(" (exceeds the bound)");
        }
        out.push_str(&format!(
            "step {}: flat rank {} degree {} [{}] -> {}\n",
            s.index, s.flat.rank, s.flat.degree, s.flat.provenance, to
        ));
    }
    match &trace.outcome {
        higgsflow::flow::FlowOutcome::Completed { steps } => {
            out.push_str(&format!("outcome: completed {steps} steps\n"));
        }
        higgsflow::flow::FlowOutcome::Blocked { at_step, reason } => {
            out.push_str(&format!("outcome: blocked at step {at_step}: {reason}\n"));
        }
    }
    if let Some(cert) = &trace.certificate {
        out.push_str(&format!(
            "certificate: filtration {:?} of exponent {}, polystable {}\n",
            cert.filtration_id, cert.exponent, cert.polystable_verified
        ));
    }
    out.push_str(&format!(
        "expected blocked: {expect_blocked}\npass: {pass}\n"
    ));
    out
}

fn render_trace_csv(trace: &FlowTrace) -> String {
    let mut out =
        String::from("index,flat_rank,flat_degree,provenance,filtration,term_rank,term_degree\n");
    for s in &trace.steps {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.index,
            s.flat.rank,
            s.flat.degree,
            s.flat.provenance,
            s.filtration_id.as_deref().unwrap_or("none"),
            s.term
                .as_ref()
                .map_or("none".into(), |t| t.rank.to_string()),
            s.term.as_ref().map_or("none".into(), |t| t.degree.clone()),
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
