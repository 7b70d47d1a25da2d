//! End-to-end checks of the `dfb` binary: exit codes, output stability, and
//! the repl loop over piped stdin.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn dfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfb"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn bench_json_is_deterministic_with_stable_output() {
    let args = [
        "bench",
        "--episodes",
        "2",
        "--rows",
        "2",
        "--cols",
        "2",
        "--ingredients",
        "2",
        "--stable-output",
        "--json",
        "-",
    ];
    let first = dfb(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let second = dfb(&args);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("\"solved\""), "unexpected report: {text}");
}

#[test]
fn demo_prints_the_world_and_the_outcome() {
    let out = dfb(&["demo", "--rows", "3", "--cols", "3", "--ingredients", "3", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("hidden world"), "missing grid header: {text}");
    assert!(text.contains("solved"), "missing episode summary: {text}");
}

#[test]
fn repl_folds_and_reports_a_marginal() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dfb"))
        .args(["repl"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"assert Equal(contents(L1), vegetable) 0.9\nmarginal contents(L1)\nquit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("folded"), "assert reply missing: {text}");
    assert!(text.contains("0.900000"), "marginal missing: {text}");
}

#[test]
fn unknown_flags_exit_with_usage_errors() {
    let out = dfb(&["bench", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_files_fail_cleanly() {
    let out = dfb(&["bench", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
