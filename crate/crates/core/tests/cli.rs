mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use nlfsr::cli::run_command;
use nlfsr::cli::spec::{format_spec, parse_spec};
use nlfsr::transform::{is_fully_shifted, is_uniform};
use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.nlfsr"))
        .display()
        .to_string()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(args: &[&str]) -> nlfsr::cli::Outcome {
    run_command(std::iter::once("nlfsr").chain(args.iter().copied()))
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nlfsr-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn simulate_prints_the_output_sequence() {
    let out = run(&[
        "simulate",
        &fixture("fib4_nonlinear"),
        "--init",
        "0111",
        "--steps",
        "15",
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "111011000101001\n");
    let hex = run(&[
        "simulate",
        &fixture("fib4_nonlinear"),
        "--init",
        "0x7",
        "--steps",
        "15",
    ]);
    assert_eq!(hex.stdout, out.stdout);
}

#[test]
fn transform_full_golden() {
    let out = run(&["transform", "--full", &fixture("fib32_cipher")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, golden("transform_fib32_cipher.txt"));
    let r = parse_spec(&out.stdout).unwrap();
    assert_eq!(r, nlfsr::fixtures::galois32_fully_shifted());
}

#[test]
fn transform_output_passes_check_and_verify() {
    let out = run(&["transform", "--full", &fixture("fib32_cipher")]);
    let path = scratch("fib32_shifted.nlfsr", &out.stdout);
    let path = path.to_str().unwrap();
    assert_eq!(run(&["check", path]).code, 0);
    let verify = run(&[
        "verify",
        &fixture("fib32_cipher"),
        "--other",
        path,
        "--method",
        "recurrence",
    ]);
    assert_eq!(verify.code, 0, "{}", verify.stdout);
    assert!(verify.stdout.starts_with("status: proven-equivalent"));
}

#[test]
fn transform_round_trip_on_random_fibonacci_registers() {
    let mut rng = common::rng(11);
    for k in 0..40 {
        let n = 3 + k % 14;
        let fib = common::random_fibonacci(&mut rng, n);
        let input = scratch(&format!("fib_{k}.nlfsr"), &format_spec(&fib));
        let input = input.to_str().unwrap();
        let out = run(&["transform", "--full", input]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let shifted = parse_spec(&out.stdout).unwrap();
        assert!(is_uniform(&shifted).is_uniform() && is_fully_shifted(&shifted));
        let path = scratch(&format!("fib_{k}_shifted.nlfsr"), &out.stdout);
        let path = path.to_str().unwrap();
        assert_eq!(run(&["check", path]).code, 0, "{}", out.stdout);
        let verify = run(&["verify", input, "--other", path, "--method", "recurrence"]);
        assert_eq!(verify.code, 0, "{}\n{}", out.stdout, verify.stdout);
    }
}

#[test]
fn transform_requires_full_and_fibonacci() {
    assert_eq!(run(&["transform", &fixture("fib4_nonlinear")]).code, 2);
    let out = run(&["transform", "--full", &fixture("galois4_same_recurrence")]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("Fibonacci"), "{}", out.stderr);
}

#[test]
fn check_golden() {
    let out = run(&["check", &fixture("fib4_nonlinear")]);
    assert_eq!(out.code, 1);
    assert_eq!(out.stdout, golden("check_fib4_nonlinear.txt"));
}

#[test]
fn check_json_golden() {
    let out = run(&["--json", "check", &fixture("lfsr3_galois")]);
    assert_eq!(out.code, 0);
    let got: Value = serde_json::from_str(&out.stdout).unwrap();
    let want: Value = serde_json::from_str(&golden("check_lfsr3_galois.json")).unwrap();
    assert_eq!(got, want);
}

#[test]
fn json_report_has_the_stable_fields() {
    let out = run(&["transform", "--full", &fixture("fib32_cipher"), "--json"]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    for key in [
        "n",
        "tau",
        "uniform",
        "fully_shifted",
        "functions",
        "metrics",
        "verdict",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["n"], 32);
    assert_eq!(v["tau"], 12);
    assert_eq!(v["metrics"]["feedback_variable_count"], 7);
    let bits: Vec<u64> = v["functions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["bit"].as_u64().unwrap())
        .collect();
    assert_eq!(bits, vec![29, 28, 27, 25, 24, 19, 14, 12]);
    assert_eq!(v["functions"][2]["anf"], "x28 + x0*x1*x12");
}

#[test]
fn verify_exhaustive_verdicts() {
    let out = run(&[
        "verify",
        &fixture("fib4_nonlinear"),
        "--other",
        &fixture("galois4_same_recurrence"),
        "--method",
        "exhaustive",
    ]);
    assert_eq!(out.code, 1);
    assert_eq!(out.stdout, golden("verify_exhaustive_negative.txt"));

    let out = run(&[
        "verify",
        &fixture("fib4_nonlinear"),
        "--other",
        &fixture("galois4_nonuniform_equivalent"),
        "--method",
        "exhaustive",
        "--json",
    ]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["verdict"]["status"], "witness-found");
    assert_eq!(v["verdict"]["method"], "exhaustive");
}

#[test]
fn verify_recurrence_inconclusive_golden() {
    let out = run(&[
        "verify",
        &fixture("fib4_nonlinear"),
        "--other",
        &fixture("galois4_same_recurrence"),
        "--method",
        "recurrence",
    ]);
    assert_eq!(out.code, 1);
    assert_eq!(out.stdout, golden("verify_recurrence_inconclusive.txt"));
}

#[test]
fn verify_window() {
    let args = |init: &'static str| {
        run(&[
            "verify",
            &fixture("fib32_cipher"),
            "--other",
            &fixture("galois32_hand_optimized"),
            "--method",
            "window",
            "--init",
            init,
        ])
    };
    let out = args("0x80000001");
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out.stdout.contains("window: 10000"));
    assert_eq!(args("0x1234").code, 0);
}

#[test]
fn shift_under_each_guard() {
    let demo = fixture("shift_demo4");
    let out = run(&[
        "shift", &demo, "--from", "3", "--to", "2", "--term", "x1*x3",
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "# x1*x3: g3 -> g2 (guard raw)\nn = 4\nf2 = x3 + x0*x2\n"
    );

    let out = run(&[
        "shift", &demo, "--from", "3", "--to", "0", "--term", "x1*x3", "--guard", "theorem2",
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.starts_with("rejected:"), "{}", out.stdout);

    let out = run(&[
        "shift",
        &fixture("fib4_nonlinear"),
        "--from",
        "3",
        "--to",
        "2",
        "--term",
        "x1",
        "--guard",
        "lemma3",
        "--json",
    ]);
    assert_eq!(out.code, 1);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["verdict"]["status"], "rejected");
    assert_eq!(v["move"]["term"], "x1");
}

#[test]
fn recurrence_command() {
    let out = run(&["recurrence", &fixture("fib4_nonlinear"), "--bit", "3"]);
    assert_eq!(
        out.stdout,
        "s(t) = s(t-4) + s(t-3) + s(t-2) + s(t-3)s(t-1)\n"
    );
    let out = run(&[
        "recurrence",
        &fixture("galois4_same_recurrence"),
        "--bit",
        "3",
    ]);
    assert_eq!(
        out.stdout,
        "s(t) = s(t-4) + s(t-3) + s(t-2) + s(t-3)s(t-1)\n"
    );
    let out = run(&[
        "recurrence",
        &fixture("galois4_same_recurrence"),
        "--bit",
        "0",
    ]);
    assert_eq!(out.code, 1);
}

#[test]
fn analyze_golden() {
    let out = run(&[
        "analyze",
        &fixture("galois4_period_divergence"),
        "--init",
        "0001",
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, golden("analyze_period_divergence.txt"));
}

#[test]
fn spec_errors_exit_with_two() {
    let bad = scratch("bad.nlfsr", "n = 4\nf3 = x0 + x0*x1\n");
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("line 2"), "{}", out.stderr);

    let out = run(&["check", "/nonexistent/register.nlfsr"]);
    assert_eq!(out.code, 2);
    let out = run(&["frobnicate"]);
    assert_eq!(out.code, 2);
    let out = run(&[
        "simulate",
        &fixture("fib4_nonlinear"),
        "--init",
        "011",
        "--steps",
        "3",
    ]);
    assert_eq!(out.code, 2);
    let out = run(&["--json", "check", bad.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(v["error"]
        .as_str()
        .unwrap()
        .contains("must not depend on x0"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_nlfsr");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&[
        "simulate",
        &fixture("lfsr3_fibonacci"),
        "--init",
        "001",
        "--steps",
        "7",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "1001011\n");
    let negative = status(&["check", &fixture("galois4_same_recurrence")]);
    assert_eq!(negative.status.code(), Some(1));
    let usage = status(&["simulate"]);
    assert_eq!(usage.status.code(), Some(2));
    let help = status(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}
