//! `htype`: run verification suites, print constants, sweep Rayleigh quotients.
//!
//! Exit codes: 0 all checks pass, 1 some check failed, 2 configuration error.

mod config;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use htype_core::closedform::{fundamental_solution, hardy_constant, sigma_p, sigma_p_beta, SolutionKind};
use htype_core::verify::{run_suite, CheckKind, VerificationReport, SUITES};
use htype_core::Error;

use config::{Format, ParamArgs, RunArgs};
use sweep::{SweepGrid, SweepMode};

#[derive(Parser)]
#[command(
    name = "htype",
    version,
    about = "Degenerate p-Laplacians and Hardy inequalities on H-type groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write one report per suite
    Verify(VerifyArgs),
    /// Print the closed-form constants for a configuration
    Constants(ConstantsArgs),
    /// Rayleigh quotients over a (k, p, alpha) grid, written as CSV
    Sweep(SweepArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Suite name, repeatable or comma separated; "all" selects every suite
    #[arg(long = "suite", env = "HTYPE_SUITE", value_delimiter = ',', default_value = "all")]
    suites: Vec<String>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value = "hardy")]
    mode: SweepMode,
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2")]
    k_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.5,2,3")]
    p_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0,1")]
    alpha_list: Vec<f64>,
    /// Corpus index of the test function (hardy mode)
    #[arg(long, default_value_t = 0)]
    function: usize,
    /// Member of the extremal sequence (sharpness mode)
    #[arg(long, default_value_t = 4)]
    j: u32,
}

enum Failure {
    Config(Error),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => cmd_verify(&args),
        Command::Constants(args) => cmd_constants(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn timestamp() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string()
}

fn prepare_out(out: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn selected_suites(names: &[String]) -> Result<Vec<&'static str>, Error> {
    let mut out: Vec<&'static str> = Vec::new();
    for name in names {
        let name = name.trim();
        let add: Vec<&'static str> = if name == "all" {
            SUITES.to_vec()
        } else {
            match SUITES.iter().find(|s| **s == name) {
                Some(s) => vec![*s],
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown suite '{name}' (expected one of {} or all)",
                        SUITES.join(", ")
                    )))
                }
            }
        };
        for s in add {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CheckRow<'a> {
    suite: &'a str,
    id: &'a str,
    kind: CheckKind,
    passed: bool,
    value: f64,
    target: f64,
    error: f64,
    tolerance: f64,
    stderr: f64,
    samples: u64,
    claim: &'a str,
    note: &'a str,
}

fn report_csv(r: &VerificationReport) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &r.checks {
        w.serialize(CheckRow {
            suite: &r.suite,
            id: &c.id,
            kind: c.kind,
            passed: c.passed,
            value: c.value,
            target: c.target,
            error: c.error,
            tolerance: c.tolerance,
            stderr: c.stderr,
            samples: c.samples,
            claim: &c.claim,
            note: &c.note,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn write_report(r: &VerificationReport, run: &RunArgs, stamp: &str) -> Result<Vec<PathBuf>, Error> {
    let mut paths = Vec::new();
    for fmt in run.formats_or(Format::Kv) {
        let path = config::output_path(&run.out, &r.suite, &r.config.group, stamp, fmt.ext());
        let text = match fmt {
            Format::Kv => r.to_toml()?,
            Format::Csv => report_csv(r)?,
        };
        write(&path, &text)?;
        paths.push(path);
    }
    Ok(paths)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let cfg = config::build(&args.params, Some(&args.run))?;
    config::validate(&cfg)?;
    let suites = selected_suites(&args.suites)?;
    prepare_out(&args.run.out)?;
    let stamp = timestamp();
    let mut all_passed = true;
    for name in suites {
        let start = Instant::now();
        let mut report = run_suite(name, &cfg)?;
        report.wall_time_s = start.elapsed().as_secs_f64();
        let paths = write_report(&report, &args.run, &stamp)?;
        for n in &report.notes {
            eprintln!("{name}: note: {n}");
        }
        let passed = report.checks.iter().filter(|c| c.passed).count();
        let failed: Vec<_> = report.failed_checks().map(|c| c.id.as_str()).collect();
        let files: Vec<_> = paths.iter().map(|p| p.display().to_string()).collect();
        println!(
            "{name:<12} {} {passed}/{} checks {:>8.2} s{}  {}",
            if report.passed { "PASS" } else { "FAIL" },
            report.checks.len(),
            report.wall_time_s,
            if failed.is_empty() {
                String::new()
            } else {
                format!("  failed: {}", failed.join(", "))
            },
            files.join(" ")
        );
        all_passed &= report.passed;
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn describe_solution(kind: SolutionKind, exponent: f64) -> String {
    match kind {
        SolutionKind::Power => format!("d^{exponent:.6}"),
        SolutionKind::Log => "log d".into(),
    }
}

fn cmd_constants(args: &ConstantsArgs) -> Result<(), Failure> {
    let cfg = config::build(&args.params, None)?;
    let params = config::validate(&cfg)?;
    let alg = cfg.algebra()?;
    let mut rows: Vec<(&str, String)> = vec![
        ("group", format!("{} (m = {}, q = {})", cfg.group, alg.m(), alg.q())),
        ("k", cfg.k.to_string()),
        ("p", cfg.p.to_string()),
        ("alpha", cfg.alpha.to_string()),
        ("beta", cfg.beta.to_string()),
        ("Q", params.homogeneous_dim().to_string()),
        ("sigma_p", sigma_p(&params)?.to_string()),
    ];
    let fs = fundamental_solution(&params, false)?;
    rows.push(("C_p", fs.constant.to_string()));
    rows.push(("exponent", fs.exponent.to_string()));
    rows.push(("kind", describe_solution(fs.kind, fs.exponent)));
    if cfg.alpha != 0.0 || cfg.beta != 0.0 {
        let w = fundamental_solution(&params, true)?;
        rows.push(("sigma_p_beta", sigma_p_beta(&params)?.to_string()));
        rows.push(("C_p_w", w.constant.to_string()));
        rows.push(("exponent_w", w.exponent.to_string()));
        rows.push(("kind_w", describe_solution(w.kind, w.exponent)));
    }
    let hardy = match hardy_constant(&params) {
        Ok(c) => c.to_string(),
        Err(e) => format!("n/a ({e})"),
    };
    rows.push(("hardy", hardy));
    for (key, value) in rows {
        println!("{key:<13} {value}");
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = config::build(&args.params, Some(&args.run))?;
    cfg.setup()?;
    let grid = SweepGrid {
        ks: args.k_list.clone(),
        ps: args.p_list.clone(),
        alphas: args.alpha_list.clone(),
        mode: args.mode,
        function: args.function,
        j: args.j,
    };
    grid.validate(&cfg.algebra()?)?;
    prepare_out(&args.run.out)?;
    let rows = sweep::run(&cfg, &grid)?;
    let stamp = timestamp();
    let stem = format!("sweep_{}", args.mode.name());
    let mut files = Vec::new();
    for fmt in args.run.formats_or(Format::Csv) {
        let path = config::output_path(&args.run.out, &stem, &cfg.group, &stamp, fmt.ext());
        let text = match fmt {
            Format::Csv => sweep::to_csv(&rows)?,
            Format::Kv => sweep::to_kv(&cfg, &grid, &rows)?,
        };
        write(&path, &text)?;
        files.push(path.display().to_string());
    }
    let n_sigma = cfg.mc_sigma(&cfg.algebra()?);
    let ok: Vec<_> = rows.iter().filter(|r| r.status == "ok").collect();
    let worst = ok.iter().filter_map(|r| r.margin_sigma).fold(f64::INFINITY, f64::min);
    let passed = worst >= -n_sigma;
    println!(
        "{stem:<12} {} {} rows, {} in range, min margin {worst:.2} sigma (limit -{n_sigma})  {}",
        if passed { "PASS" } else { "FAIL" },
        rows.len(),
        ok.len(),
        files.join(" ")
    );
    if passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
