use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: &str) -> Output {
    run_env(args, stdin, &[])
}

fn run_env(args: &[&str], stdin: &str, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spandoubler"));
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn records(out: &Output) -> Vec<serde_json::Value> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("format=1"));
    lines.map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn lambda_of_full_group_is_one() {
    let out = run(&["lambda"], "group 5; set {0,1,2,3,4}; eq 1 2 2\n");
    assert_eq!(out.status.code(), Some(0));
    let r = records(&out);
    assert_eq!(r[0]["lambda_exact"], "1/1");
}

#[test]
fn driver_transcript_is_audited() {
    let out = run(&["driver"], "group 3 3 3 3; set solution_free (1,1,1) seed=3; eq 1 1 1\n");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = &records(&out)[0];
    assert_eq!(r["checks"]["itpos_audited"], true);
    assert_ne!(r["termination"], "max_iters");
}

#[test]
fn parse_errors_exit_one_with_position() {
    let out = run(&["spectrum"], "group 3 3; bogus 1\n");
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1") && err.contains("byte 11") && err.contains("unknown field"), "{err}");
    assert_eq!(run(&["nope"], "").status.code(), Some(1));
    assert_eq!(run(&["verify", "--suite", "nope"], "").status.code(), Some(1));
}

#[test]
fn unbalanced_equation_is_a_warning() {
    let out = run(&["lambda"], "group 3; set {0,1}; eq 1 1 2\n");
    assert_eq!(out.status.code(), Some(0));
    let r = &records(&out)[0];
    assert!(r["warnings"][0].as_str().unwrap().contains("unbalanced"));
}

#[test]
fn budget_failures_exit_two() {
    let out = run(&["chang", "--budget-span", "1"], "group 3 3 3; set random 0.3 seed=1; delta 1/4\n");
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(records(&out)[0]["status"], "error");
}

#[test]
fn order_cap_from_environment() {
    let out = run_env(&["energy"], "group 3 3 3; set random 0.5\n", &[("SPANDOUBLER_MAX_ORDER", "10")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(records(&out)[0]["error"].as_str().unwrap().contains("exceeds"));
    let out = run_env(&["energy"], "group 3 3; set random 0.5\n", &[("SPANDOUBLER_MAX_ORDER", "10")]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn count_expands_seeds_and_csv_is_long() {
    let out = run(&["energy", "--count", "3", "--seed", "4", "--csv"], "# comment\ngroup 3 3 3; set random 0.3\n");
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("format=1"));
    assert_eq!(lines.next(), Some("index,command,status,key,value"));
    let energy_rows: Vec<&str> = text.lines().filter(|l| l.contains(",energy,pass,energy,")).collect();
    assert_eq!(energy_rows.len(), 3);
    assert!(energy_rows[0].starts_with("0,") && energy_rows[2].starts_with("2,"));
}

#[test]
fn timings_only_on_request() {
    let input = "group 7; set {0,1,3}\n";
    let plain = run(&["energy"], input);
    let again = run(&["energy"], input);
    assert_eq!(plain.stdout, again.stdout);
    assert!(!String::from_utf8_lossy(&plain.stdout).contains("timing_ms"));
    assert!(String::from_utf8_lossy(&run(&["energy", "--timings"], input).stdout).contains("timing_ms"));
}

#[test]
fn verify_reports_summary() {
    let out = run(&["verify", "--suite", "spanstruct", "--seed", "1", "--count", "20"], "");
    assert_eq!(out.status.code(), Some(0));
    let r = records(&out);
    let summary = r.last().unwrap();
    assert_eq!(summary["command"], "summary");
    assert_eq!(summary["suite"], "covers");
    assert_eq!(summary["passed"], 20);
}
