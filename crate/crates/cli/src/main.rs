//! `longwave`: configured experiments and verify suites from the terminal.
//!
//! Hand-rolled argument handling: three subcommands, dotted `key=value`
//! overrides, and a thread-count knob. Exit code 0 exactly when every
//! asserted check in the produced report passed.

use longwave_harness::config::{parse_override, Config};
use longwave_harness::error::{HarnessError, Result};
use longwave_harness::verify;
use longwave_harness::{experiments, Report};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
usage: longwave <command> [args]

commands:
  run <config.ini> [section.key=value ...] [--out DIR] [--threads N] [--dry-run]
      Run one experiment from an INI config. Overrides use dotted keys
      (for example sweep.eps_list=0.1,0.05); unknown keys are rejected
      by name. --dry-run prints the validated plan and writes nothing.
  verify <suite> [--out DIR] [--threads N]
      Run a named check suite. Suites: inequalities, solvers, correctors,
      cascade, equilibrium, sweep, all.
  list
      List the experiments and their shipped default configs.

environment:
  LONGWAVE_THREADS   worker thread count (--threads wins if both given)
";

#[derive(Debug)]
struct CommonFlags {
    out: Option<PathBuf>,
    threads: Option<usize>,
    dry_run: bool,
    positional: Vec<String>,
}

fn parse_flags(args: &[String]) -> Result<CommonFlags> {
    let mut flags = CommonFlags { out: None, threads: None, dry_run: false, positional: Vec::new() };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--out" => {
                let v = it.next().ok_or_else(|| HarnessError::Config("--out needs a directory".into()))?;
                flags.out = Some(PathBuf::from(v));
            }
            "--threads" => {
                let v = it.next().ok_or_else(|| HarnessError::Config("--threads needs a count".into()))?;
                let n = v.parse().map_err(|_| HarnessError::Config(format!("--threads: '{v}' is not a count")))?;
                flags.threads = Some(n);
            }
            "--dry-run" => flags.dry_run = true,
            other if other.starts_with("--") => {
                return Err(HarnessError::Config(format!("unknown flag '{other}'")));
            }
            other => flags.positional.push(other.to_string()),
        }
    }
    Ok(flags)
}

/// Pin the global worker pool before any parallel work runs. Precedence:
/// --threads, then LONGWAVE_THREADS, then the rayon default.
fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("LONGWAVE_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| {
                HarnessError::Config(format!("LONGWAVE_THREADS: '{v}' is not a count"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(HarnessError::Config("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn cmd_run(args: &[String]) -> Result<Report> {
    let flags = parse_flags(args)?;
    let mut positional = flags.positional.iter();
    let config_path = positional
        .next()
        .ok_or_else(|| HarnessError::Config("run needs a config file".into()))?;
    let overrides: Vec<(String, String)> = positional
        .map(|tok| parse_override(tok))
        .collect::<Result<_>>()?;

    let mut cfg = Config::load(config_path)?;
    cfg.apply_overrides(&overrides)?;

    if flags.dry_run {
        print!("{}", cfg.plan());
        println!("dry run: validated, nothing executed");
        let mut report = Report::new("dry run");
        report.info("plan", "validated");
        return Ok(report);
    }

    init_threads(flags.threads)?;
    let out = flags
        .out
        .or_else(|| cfg.get_str("experiment.out").ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.kind.name()));
    let report = experiments::run(&cfg, &out)?;
    print!("{}", report.render());
    println!("artifacts: {}", out.display());
    Ok(report)
}

fn cmd_verify(args: &[String]) -> Result<Report> {
    let flags = parse_flags(args)?;
    if flags.dry_run {
        return Err(HarnessError::Config("--dry-run applies to run only".into()));
    }
    let [suite] = flags.positional.as_slice() else {
        return Err(HarnessError::Config(format!(
            "verify needs exactly one suite name; available: {}",
            verify::SUITE_NAMES.join(", ")
        )));
    };
    init_threads(flags.threads)?;
    let out = flags
        .out
        .unwrap_or_else(|| PathBuf::from("out").join(format!("verify_{suite}")));
    let report = verify::run_suite(suite, &out)?;
    print!("{}", report.render());
    println!("artifacts: {}", out.display());
    Ok(report)
}

fn cmd_list() {
    println!("experiments (default config in configs/):");
    for kind in longwave_harness::ExperimentKind::all() {
        println!("  {:24} configs/{}.ini", kind.name(), kind.name());
    }
    println!("verify suites: {}", verify::SUITE_NAMES.join(", "));
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return ExitCode::FAILURE;
    };
    let rest = &args[1..];
    let outcome = match command.as_str() {
        "run" => cmd_run(rest),
        "verify" => cmd_verify(rest),
        "list" => {
            if !rest.is_empty() {
                eprintln!("error: list takes no arguments");
                return ExitCode::FAILURE;
            }
            cmd_list();
            return ExitCode::SUCCESS;
        }
        "--help" | "-h" | "help" => {
            print!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        other => {
            eprintln!("error: unknown command '{other}'");
            eprint!("{USAGE}");
            return ExitCode::FAILURE;
        }
    };
    match outcome {
        Ok(report) if report.all_passed() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
