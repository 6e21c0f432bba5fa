//! End-to-end runs of the binary: exit codes, formats, and the seed env.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_higgsflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn verify_commands_pass_with_exit_zero() {
    for args in [
        vec![
            "verify",
            "counterexample",
            "--p",
            "2",
            "--g",
            "2",
            "--ell",
            "2",
        ],
        vec!["verify", "big-rank", "--p", "2", "--g", "2", "--rank", "5"],
        vec!["verify", "tensor", "--p", "2", "--g", "3"],
        vec![
            "verify",
            "tensor",
            "--p",
            "3",
            "--g",
            "2",
            "--assume-generic",
        ],
        vec!["verify", "extension", "--g", "4"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {out:?}");
        assert!(stdout(&out).contains("pass: true"), "{args:?}");
    }
}

#[test]
fn config_problems_exit_two() {
    for args in [
        // 4 is not prime
        vec![
            "verify",
            "counterexample",
            "--p",
            "4",
            "--g",
            "2",
            "--ell",
            "2",
        ],
        // ell outside 1..=2g-2
        vec![
            "verify",
            "counterexample",
            "--p",
            "2",
            "--g",
            "2",
            "--ell",
            "9",
        ],
        // odd p needs the genericity flag
        vec!["verify", "tensor", "--p", "3", "--g", "2"],
        // two different starts
        vec!["flow", "--p", "2", "--g", "2", "--ell", "2", "--rank", "4"],
        // unknown subcommand, rejected by the parser
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {out:?}");
    }
}

#[test]
fn unexpected_block_exits_one() {
    let blocked = run(&["flow", "--p", "2", "--g", "2", "--ell", "2"]);
    assert_eq!(blocked.status.code(), Some(1));
    let expected = run(&[
        "flow",
        "--p",
        "2",
        "--g",
        "2",
        "--ell",
        "2",
        "--expect-blocked",
    ]);
    assert_eq!(expected.status.code(), Some(0));
    let wrong_expectation = run(&["flow", "--p", "2", "--g", "2", "--expect-blocked"]);
    assert_eq!(wrong_expectation.status.code(), Some(1));
}

#[test]
fn json_output_parses_and_csv_has_headers() {
    let out = run(&["scan", "--p", "2", "--g", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["pass"], serde_json::Value::Bool(true));
    assert!(doc["case_rows"].as_array().is_some_and(|r| !r.is_empty()));

    let csv = run(&["scan", "--p", "2", "--g", "2", "--format", "csv"]);
    assert!(stdout(&csv).starts_with("p,g,ell,n,d_l,bound,reduced,nonnegative,equality\n"));

    let report = run(&["verify", "extension", "--g", "3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&report)).unwrap();
    assert_eq!(doc["meta"]["tool"], "higgsflow");
    assert!(doc["claims"].as_array().is_some_and(|c| !c.is_empty()));
}

#[test]
fn out_flag_writes_the_file() {
    let path: PathBuf =
        std::env::temp_dir().join(format!("higgsflow-cli-test-{}.json", std::process::id()));
    let out = Command::new(env!("CARGO_BIN_EXE_higgsflow"))
        .args([
            "construct",
            "--p",
            "3",
            "--g",
            "2",
            "--ell",
            "1",
            "--format",
            "json",
            "--out",
        ])
        .arg(&path)
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["params"]["d_l"], serde_json::json!(1));
    std::fs::remove_file(&path).ok();
}

#[test]
fn oracle_check_reads_the_seed_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_higgsflow"))
        .args(["oracle-check", "--p", "2", "--g", "2", "--count", "12"])
        .env("HIGGSFLOW_SEED", "7")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("seed 7"));

    let bad = Command::new(env!("CARGO_BIN_EXE_higgsflow"))
        .args(["oracle-check", "--p", "2", "--g", "2"])
        .env("HIGGSFLOW_SEED", "not-a-number")
        .output()
        .expect("binary runs");
    assert_eq!(bad.status.code(), Some(2));
}
