use std::io::Read;
use std::process::ExitCode;

use clap::Parser;
use spandoubler_cli::commands::{run_command, COMMANDS};
use spandoubler_cli::instance::{parse_instance, Instance};
use spandoubler_cli::report::{render, Record, Status};
use spandoubler_cli::suites::{verify_suite, SUITES};
use spandoubler_cli::{max_order_from_env, par_map, Settings};

/// Seeded experiments and verification suites over small finite abelian groups.
#[derive(Parser, Debug)]
#[command(name = "spandoubler", version)]
struct Cli {
    /// spectrum, symset, chang, span-asym, correlated-span, energy, bsg, lambda, increment, driver or verify.
    command: String,

    /// Instance file, one instance per line; reads stdin when omitted or "-".
    input: Option<String>,

    /// Suite for `verify`.
    #[arg(long)]
    suite: Option<String>,

    /// Base seed for generators without an explicit seed= and for suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Suite size, or copies of each input line with seeds seed, seed+1, ...
    #[arg(long)]
    count: Option<usize>,

    /// Largest basis whose span is enumerated.
    #[arg(long)]
    budget_span: Option<usize>,

    /// Work budget for exact solution counts.
    #[arg(long)]
    budget_brute: Option<u128>,

    /// Emit index,command,status,key,value rows instead of JSON lines.
    #[arg(long)]
    csv: bool,

    /// Audit the driver's counting inequality every N steps (0 disables).
    #[arg(long)]
    audit_every: Option<usize>,

    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Include per-record timing_ms.
    #[arg(long)]
    timings: bool,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn read_input(path: Option<&str>) -> std::io::Result<String> {
    match path {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
        Some(p) => std::fs::read_to_string(p),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let mut settings = Settings {
        seed: cli.seed,
        threads: cli.threads,
        ..Settings::default()
    };
    if let Some(v) = cli.budget_span {
        settings.span_limit = v;
    }
    if let Some(v) = cli.budget_brute {
        settings.brute_budget = v;
    }
    if let Some(v) = cli.audit_every {
        settings.audit_every = v;
    }
    match max_order_from_env() {
        Ok(Some(v)) => settings.max_order = v,
        Ok(None) => {}
        Err(e) => return usage(e),
    }

    let records: Vec<Record> = if cli.command == "verify" {
        let Some(suite) = cli.suite.as_deref() else {
            let names: Vec<&str> = SUITES.iter().map(|s| s.0).collect();
            return usage(format!("verify needs --suite ({})", names.join(", ")));
        };
        match verify_suite(suite, cli.seed, cli.count, &settings) {
            Ok(r) => r.lines(),
            Err(e) => return usage(e),
        }
    } else {
        if !COMMANDS.contains(&cli.command.as_str()) {
            return usage(format!("unknown command '{}' (known: {}, verify)", cli.command, COMMANDS.join(", ")));
        }
        let text = match read_input(cli.input.as_deref()) {
            Ok(t) => t,
            Err(e) => return usage(e),
        };
        let mut specs = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match parse_instance(line) {
                Ok(s) => specs.push(s),
                Err(e) => return usage(format!("line {}: {e}", line_no + 1)),
            }
        }
        let copies = cli.count.unwrap_or(1);
        let jobs: Vec<(usize, _, u64)> = specs
            .into_iter()
            .flat_map(|s| (0..copies as u64).map(move |k| (s.clone(), cli.seed.wrapping_add(k))))
            .enumerate()
            .map(|(i, (s, seed))| (i, s, seed))
            .collect();
        let command = cli.command.clone();
        par_map(settings.threads, jobs, |(i, spec, seed)| {
            match Instance::materialize(spec.clone(), settings.max_order, seed) {
                Ok(inst) => run_command(&command, i, &inst, &settings),
                Err(e) => {
                    let mut r = Record::new(i, &command);
                    r.set("input", spec.text.clone());
                    r.error(e);
                    r
                }
            }
        })
    };

    print!("{}", render(&records, cli.csv, cli.timings));
    if records.iter().all(|r| r.status == Status::Pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
