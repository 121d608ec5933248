//! Argument parsing, logging setup and output routing.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, LevelFilter};
use mwumech_core::auction::InstanceKind;
use serde::Serialize;

use crate::commands::{self, Overrides, DEFAULT_SAMPLES};
use crate::error::CliError;
use crate::input::{DecomposeInput, InstanceInput, MatrixInput};
use crate::json;
use crate::report::Report;

pub const LOG_ENV: &str = "MWUMECH_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "mwumech",
    version,
    about = "MWU covering and packing solvers, convex decomposition and truthful-in-expectation mechanisms"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Input document; stdin when absent or `-`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Solver accuracy; for the mechanism, the decomposition accuracy.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Truthfulness slack of the mechanism.
    #[arg(long, global = true)]
    pub epsilon0: Option<f64>,
    /// `exact` or `greedy`.
    #[arg(long, global = true)]
    pub alpha_mode: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate min c.x subject to Ax >= b, x >= 0.
    SolveCover,
    /// Approximate max c.x subject to Ax <= b, x >= 0, or the welfare LP of an auction.
    SolvePack,
    /// Write alpha times a fractional allocation as a convex combination of integral ones.
    Decompose,
    #[command(subcommand)]
    Mechanism(MechanismCommand),
    /// Generate a random auction instance.
    Gen(GenArgs),
}

#[derive(Debug, Subcommand)]
pub enum MechanismCommand {
    /// Run the mechanism on the reported values and draw one outcome.
    Run,
    /// Check the mechanism's guarantees on an instance.
    Audit {
        /// Monte Carlo samples for the informational cross-check.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// `single_minded_uniform`, `additive_uniform` or `adversarial_overlap`.
    #[arg(long, default_value = "single_minded_uniform")]
    pub kind: String,
    /// Number of players.
    #[arg(long)]
    pub n: usize,
    /// Number of items.
    #[arg(long)]
    pub m: usize,
}

fn init_logging() -> Result<(), CliError> {
    let level = match std::env::var(LOG_ENV).ok().as_deref() {
        None | Some("") | Some("off") => LevelFilter::Off,
        Some("info") => LevelFilter::Info,
        Some("trace") => LevelFilter::Trace,
        Some(other) => {
            return Err(CliError::Input(format!(
                "{LOG_ENV}={other}: expected off, info or trace"
            )))
        }
    };
    // A second initialisation in the same process keeps the first logger.
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
    Ok(())
}

fn read_input(path: &Option<PathBuf>) -> Result<(String, String), CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Ok((text, p.display().to_string()))
        }
        _ => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::Input(format!("<stdin>: {e}")))?;
            Ok((text, "<stdin>".to_owned()))
        }
    }
}

fn emit(global: &GlobalArgs, text: &str) -> Result<(), CliError> {
    match &global.output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| CliError::Failure(format!("stdout: {e}")))
        }
    }
}

fn finish<C: Serialize, R: Serialize>(mut report: Report<C, R>, started: Instant) -> (String, bool) {
    report.timing.wall_seconds = started.elapsed().as_secs_f64();
    (json::to_string(&report), report.passed)
}

fn json_only(global: &GlobalArgs) -> Result<(), CliError> {
    match global.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Input(
            "--format csv is only available for `mechanism audit`".to_owned(),
        )),
    }
}

/// Runs one command; returns the text to emit and whether every invariant
/// flag held.
pub fn execute(cli: &Cli) -> Result<(String, bool), CliError> {
    let g = &cli.global;
    let o = Overrides {
        seed: g.seed,
        epsilon: g.epsilon,
        epsilon0: g.epsilon0,
        alpha_mode: g.alpha_mode.clone(),
    };
    let started = Instant::now();
    match &cli.command {
        Command::SolveCover => {
            json_only(g)?;
            let (text, source) = read_input(&g.input)?;
            let doc: MatrixInput = json::parse(&text, &source)?;
            Ok(finish(commands::solve_cover(&doc, &source, &o)?, started))
        }
        Command::SolvePack => {
            json_only(g)?;
            let (text, source) = read_input(&g.input)?;
            let value: serde_json::Value = json::parse(&text, &source)?;
            if value.get("players").is_some() {
                let doc: InstanceInput = json::parse(&text, &source)?;
                Ok(finish(commands::solve_pack_auction(&doc, &source, &o)?, started))
            } else {
                let doc: MatrixInput = json::parse(&text, &source)?;
                Ok(finish(commands::solve_pack_matrix(&doc, &source, &o)?, started))
            }
        }
        Command::Decompose => {
            json_only(g)?;
            let (text, source) = read_input(&g.input)?;
            let doc: DecomposeInput = json::parse(&text, &source)?;
            Ok(finish(commands::decompose(&doc, &source, &o)?, started))
        }
        Command::Mechanism(MechanismCommand::Run) => {
            json_only(g)?;
            let (text, source) = read_input(&g.input)?;
            let doc: InstanceInput = json::parse(&text, &source)?;
            Ok(finish(commands::mechanism_run(&doc, &source, &o)?, started))
        }
        Command::Mechanism(MechanismCommand::Audit { samples }) => {
            let (text, source) = read_input(&g.input)?;
            let doc: InstanceInput = json::parse(&text, &source)?;
            let report = commands::mechanism_audit(&doc, &source, &o, *samples)?;
            match g.format {
                Format::Json => Ok(finish(report, started)),
                Format::Csv => {
                    let passed = report.passed;
                    Ok((commands::audit_csv(&report)?, passed))
                }
            }
        }
        Command::Gen(args) => {
            json_only(g)?;
            let kind = InstanceKind::parse(&args.kind)?;
            let doc = commands::gen(kind, args.n, args.m, &o)?;
            Ok((json::to_string(&doc), true))
        }
    }
}

/// Full command-line entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = init_logging().and_then(|()| execute(&cli)).and_then(|(text, passed)| {
        emit(&cli.global, &text)?;
        Ok(passed)
    });
    exit_code(outcome)
}

fn exit_code(outcome: Result<bool, CliError>) -> i32 {
    match outcome {
        Ok(true) => 0,
        Ok(false) => {
            error!("one or more invariant flags failed");
            1
        }
        Err(e) => {
            eprintln!("mwumech: {e}");
            e.exit_code()
        }
    }
}
