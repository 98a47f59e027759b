//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Pinned: seed 42, tolerance 1e-9 (inside the suites), the time limits below.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use serde_json::Value;
use spandoubler_cli::report::Status;
use spandoubler_cli::suites::{verify_suite, SuiteReport};
use spandoubler_cli::Settings;
use spandoubler_core::additive::{additive_energy, PointSet};
use spandoubler_core::increment::{fourier_coefficient, linf_increment};
use spandoubler_core::Group;

const SEED: u64 = 42;

struct Gate {
    failed: usize,
}

impl Gate {
    fn line(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {id} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn run(suite: &str, count: usize) -> (SuiteReport, Duration) {
    let t = Instant::now();
    let r = verify_suite(suite, SEED, Some(count), &Settings::default()).expect("known suite");
    (r, t.elapsed())
}

fn passed(r: &SuiteReport) -> usize {
    r.records.iter().filter(|x| x.status == Status::Pass).count()
}

fn check_true(r: &SuiteReport, index: usize, check: &str) -> bool {
    r.records[index].fields["checks"][check] == Value::Bool(true)
}

fn first_failure(r: &SuiteReport) -> String {
    r.records
        .iter()
        .find(|x| x.status != Status::Pass)
        .map_or(String::new(), |x| format!("; first failure: {}", Value::Object(x.fields.clone())))
}

fn cli(args: &[&str]) -> Vec<u8> {
    Command::new(env!("CARGO_BIN_EXE_spandoubler"))
        .args(args)
        .output()
        .expect("run binary")
        .stdout
}

fn main() -> ExitCode {
    let mut gate = Gate { failed: 0 };
    let mut reports = Vec::new();

    let (r, t) = run("lambda", 200);
    let ok = passed(&r) == 200 && t < Duration::from_secs(30);
    gate.line(1, "lambda oracle equivalence", ok, format!(
        "{}/200 Fourier vs exact within 1e-9 over Z_3^3, Z_5^2, Z_7 with r in 3..=5, {:.2?} (limit 30s){}",
        passed(&r), t, first_failure(&r)));
    reports.push(r);

    let (r, _) = run("energy", 500);
    let g7 = Group::with_default_cap(&[7]).unwrap();
    let fixed = additive_energy(&PointSet::from_indices(&g7, [0, 1, 3]));
    let ok = passed(&r) == 500 && fixed == 15 && check_true(&r, 0, "fixed_value_15");
    gate.line(2, "energy oracle equivalence", ok, format!(
        "{}/500 equal to the quadruple loop (|S| <= 64), E({{0,1,3}} in Z_7) = {fixed}{}",
        passed(&r), first_failure(&r)));
    reports.push(r);

    let (r, t) = run("harmonic", 1000);
    let ok = passed(&r) == 1000 && t < Duration::from_secs(60);
    gate.line(3, "harmonic identities", ok, format!(
        "{}/1000 Parseval, convolution, Hausdorff-Young, inversion within 1e-9 (orders <= 4096), {:.2?} (limit 60s){}",
        passed(&r), t, first_failure(&r)));
    reports.push(r);

    let (r, _) = run("covers", 1000);
    gate.line(4, "cover containment", passed(&r) == 1000, format!(
        "{}/1000 spectrum, asymmetric, symmetry-set containment and correlated-span overlap recounts{}",
        passed(&r), first_failure(&r)));
    reports.push(r);

    let (r, _) = run("energy-bound", 1000);
    gate.line(5, "spectral energy bound", passed(&r) == 1000, format!(
        "{}/1000 with E(S) >= delta^8 alpha |S|^4 exactly, S = Spec_delta \\ {{0}}, orders <= 729, delta in {{1/4, 1/2, 1}}{}",
        passed(&r), first_failure(&r)));
    reports.push(r);

    let (r, _) = run("increment", 1000);
    let g = Group::prime_power(3, 2).unwrap();
    let a = PointSet::from_indices(&g, [[0, 0], [0, 1], [0, 2], [1, 0]].map(|c| g.index_of(&c)));
    let gamma = g.index_of(&[1, 0]);
    let eps = fourier_coefficient(&a, gamma).norm() / a.density_f64();
    let worked = linf_increment(&a, gamma, eps).map(|i| i.new_density);
    let ok = passed(&r) == 1000 && worked == Ok(Ratio::from_integer(1)) && check_true(&r, 0, "worked_density_one");
    gate.line(6, "increment postconditions", ok, format!(
        "{}/1000 recounted densities meet alpha(1+eps/2) - 1e-9 and eps - 1e-9; worked example new_density = {}{}",
        passed(&r), worked.as_ref().map_or_else(|e| e.to_string(), |d| d.to_string()), first_failure(&r)));
    reports.push(r);

    let (r, t) = run("driver", 50);
    let all_steps_audited = r.records.iter().all(|x| {
        x.fields["steps"]
            .as_array()
            .is_some_and(|s| s.iter().all(|st| st["itpos"]["holds"] == Value::Bool(true)))
    });
    let steps: u64 = r.records.iter().filter_map(|x| x.fields["step_count"].as_u64()).sum();
    let ok = passed(&r) == 50 && all_steps_audited && t < Duration::from_secs(300);
    gate.line(7, "driver soundness", ok, format!(
        "{}/50 solution-free instances (Z_3^4 and Z_5^3) terminated within max_iters with increasing densities, \
         counting inequality audited exactly at all {steps} steps, {:.2?} (limit 5 min){}",
        passed(&r), t, first_failure(&r)));
    reports.push(r);

    let mut constants = 0;
    let mut bad = Vec::new();
    for r in &reports {
        for (k, v) in r.constants() {
            constants += 1;
            if !v.as_f64().is_some_and(f64::is_finite) {
                bad.push(format!("{}:{k}", r.suite));
            }
        }
    }
    let covers = &reports[3];
    let has_cover_constants = ["chang", "shkredov", "symset"]
        .iter()
        .all(|k| covers.summary.fields["constants"].get(*k).is_some());
    gate.line(8, "measured constants", bad.is_empty() && has_cover_constants && constants > 0, format!(
        "{constants} summary values, non-finite: {bad:?}; cover constants: chang max {}, shkredov max {}, symset max {}",
        covers.summary.fields["constants"]["chang"]["max"],
        covers.summary.fields["constants"]["shkredov"]["max"],
        covers.summary.fields["constants"]["symset"]["max"]));

    let mut same = Vec::new();
    for suite in ["covers", "lambda", "driver", "increment"] {
        let one = cli(&["verify", "--suite", suite, "--seed", "7", "--count", "60", "--threads", "1"]);
        let many = cli(&["verify", "--suite", suite, "--seed", "7", "--count", "60", "--threads", "4"]);
        same.push((suite, !one.is_empty() && one == many));
    }
    let ok = same.iter().all(|s| s.1);
    gate.line(9, "determinism", ok, format!("1 vs 4 threads byte-identical: {same:?}"));

    println!("{} of 9 criteria passed", 9 - gate.failed);
    if gate.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
