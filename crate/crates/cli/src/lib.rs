//! Command-line driver: runs verification suites over a parameter grid and
//! emits versioned JSON or CSV reports.

pub mod config;
pub mod golden;
pub mod report;
pub mod suites;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{ConfigError, Format, GridArgs, RunConfig};
use report::{Report, SuiteResult};

#[derive(Debug, Parser)]
#[command(name = "mpd", version, about = "Exact verification of level-m divided-power calculus over Z/p^N")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the verification suites; exit 0 iff every asserted suite passes
    Verify(GridArgs),
    /// Per-weight homology tables of the linearized complex and its augmentation
    Homology(GridArgs),
    /// Run the advisory jet-complex probe; never fails on findings
    ExploreJet(GridArgs),
    /// Re-render a JSON report
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON report produced by another command
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Errors that stop a command before a verdict; they exit with status 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("cannot read report {path}: {msg}")]
    Input { path: PathBuf, msg: String },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, ConfigError> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| ConfigError::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Golden comparison or blessing, then emission.
fn finish(command: &str, cfg: &RunConfig, mut results: Vec<SuiteResult>) -> Result<Report, CliError> {
    if let Some(dir) = &cfg.golden_dir {
        if cfg.bless {
            golden::bless(dir, &results, cfg.max_weight, &cfg.eval)?;
        } else {
            golden::compare(dir, &mut results, cfg.max_weight, &cfg.eval);
        }
    }
    let report = Report::new(command, cfg.echo(), results);
    report.emit(cfg.format, cfg.out.as_deref())?;
    let s = &report.summary;
    eprintln!(
        "{command}: {} passed, {} failed, {} skipped, {} advisory failures",
        s.passed, s.failed, s.skipped, s.advisory_failed
    );
    Ok(report)
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify(args) => {
            let cfg = RunConfig::resolve(&args)?;
            let results = with_threads(cfg.threads, || suites::run_suites(&cfg, &cfg.suites))??;
            let report = finish("verify", &cfg, results)?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Homology(args) => {
            let cfg = RunConfig::resolve(&args)?;
            let results = with_threads(cfg.threads, || suites::run_homology(&cfg))??;
            let report = finish("homology", &cfg, results)?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
        }
        Command::ExploreJet(args) => {
            let cfg = RunConfig::resolve(&args)?;
            let results = with_threads(cfg.threads, || suites::run_jet(&cfg))??;
            finish("explore-jet", &cfg, results)?;
            Ok(EXIT_OK)
        }
        Command::Report(args) => {
            let input = |msg: String| CliError::Input {
                path: args.input.clone(),
                msg,
            };
            let text = std::fs::read_to_string(&args.input).map_err(|e| input(e.to_string()))?;
            let report: Report = serde_json::from_str(&text).map_err(|e| input(e.to_string()))?;
            if report.schema != report::REPORT_SCHEMA {
                return Err(input(format!("unsupported schema {}", report.schema)));
            }
            report.emit(args.format, args.out.as_deref())?;
            Ok(EXIT_OK)
        }
    }
}
