//! Batch CLI: replay observation streams through precise or credal runs,
//! emit deterministic JSON reports and CSV tables, and ship the built-in
//! demos.
//!
//! Exit codes: 0 on success, 1 on validation failure (bad arguments,
//! config, or stream), 2 on engine error during a run.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dpk_core::config::{parse_stream, SessionConfig};
use dpk_core::report::RunReport;
use dpk_core::runner::{self, DemoName, RunOptions};

#[derive(Parser)]
#[command(name = "dpk", version, about = "Sequential belief updating for precise and imprecise probabilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a precise update over a stream of observation batches.
    RunDpk(RunArgs),
    /// Run a credal-set update over a stream of observation batches.
    RunDipk(RunArgs),
    /// Run a built-in demonstration.
    Demo(DemoArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Session configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Observation stream: one batch of symbol tokens per line.
    #[arg(long)]
    stream: PathBuf,
    /// Write the JSON report here (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the flat per-step CSV table here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Override the config's stopping tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Classify every event of the space at every step (credal runs,
    /// spaces up to 12 atoms).
    #[arg(long)]
    sweep_events: bool,
    /// Seed for the randomized self-checks recorded in the report.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct DemoArgs {
    /// Which demo to run.
    name: Demo,
    /// Write the JSON report here (summary always goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the flat per-step CSV table here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    BinomialExample,
    Noncommutativity,
    Survey,
}

impl From<Demo> for DemoName {
    fn from(demo: Demo) -> DemoName {
        match demo {
            Demo::BinomialExample => DemoName::BinomialExample,
            Demo::Noncommutativity => DemoName::Noncommutativity,
            Demo::Survey => DemoName::Survey,
        }
    }
}

const VALIDATION_FAILURE: u8 = 1;
const ENGINE_ERROR: u8 = 2;

fn read_file(path: &PathBuf, what: &str) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {what} {}: {e}", path.display());
        VALIDATION_FAILURE
    })
}

fn write_outputs(
    report: &RunReport,
    out: Option<&PathBuf>,
    csv: Option<&PathBuf>,
    stdout_json: bool,
) -> Result<(), u8> {
    let json = report.to_json();
    match out {
        Some(path) => std::fs::write(path, &json).map_err(|e| {
            eprintln!("error: cannot write report {}: {e}", path.display());
            ENGINE_ERROR
        })?,
        None if stdout_json => print!("{json}"),
        None => {}
    }
    if let Some(path) = csv {
        let table = report.to_csv().map_err(|e| {
            eprintln!("error: {e}");
            ENGINE_ERROR
        })?;
        std::fs::write(path, table).map_err(|e| {
            eprintln!("error: cannot write csv {}: {e}", path.display());
            ENGINE_ERROR
        })?;
    }
    Ok(())
}

fn run(args: &RunArgs, credal: bool) -> Result<(), u8> {
    let config_text = read_file(&args.config, "config")?;
    let stream_text = read_file(&args.stream, "stream")?;
    let config = SessionConfig::from_json(&config_text).map_err(|e| {
        eprintln!("error: {e}");
        VALIDATION_FAILURE
    })?;
    let session = config.validate().map_err(|e| {
        eprintln!("error: {e}");
        VALIDATION_FAILURE
    })?;
    let batches = parse_stream(&stream_text, &session.model).map_err(|e| {
        eprintln!("error: {e}");
        VALIDATION_FAILURE
    })?;
    let opts = RunOptions {
        tolerance: args.tolerance,
        sweep_events: args.sweep_events,
        seed: args.seed,
    };
    if credal
        && (opts.sweep_events || session.sweep_events)
        && session.space.len() > dpk_core::dipk::SWEEP_LIMIT
    {
        eprintln!(
            "error: event sweep needs at most {} atoms, space has {}",
            dpk_core::dipk::SWEEP_LIMIT,
            session.space.len()
        );
        return Err(VALIDATION_FAILURE);
    }
    let report = if credal {
        runner::run_dipk_session(&session, &batches, &opts)
    } else {
        runner::run_dpk_session(&session, &batches, &opts)
    }
    .map_err(|e| {
        eprintln!("error: {e}");
        ENGINE_ERROR
    })?;
    write_outputs(&report, args.out.as_ref(), args.csv.as_ref(), true)
}

fn run_demo(args: &DemoArgs) -> Result<(), u8> {
    let output = runner::demo(args.name.into()).map_err(|e| {
        eprintln!("error: {e}");
        ENGINE_ERROR
    })?;
    print!("{}", output.summary);
    write_outputs(&output.report, args.out.as_ref(), args.csv.as_ref(), false)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not failures.
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(VALIDATION_FAILURE);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match &cli.command {
        Command::RunDpk(args) => run(args, false),
        Command::RunDipk(args) => run(args, true),
        Command::Demo(args) => run_demo(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
