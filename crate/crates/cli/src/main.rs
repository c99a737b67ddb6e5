//! `lambda-zeno`: runs single-photon scattering experiments and writes
//! their data as CSV or JSON.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CliError, Format, Settings};

#[derive(Parser)]
#[command(
    name = "lambda-zeno",
    version,
    about = "Repeated photon scattering on a Lambda-atom ensemble"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand)]
enum Command {
    /// Scatter one photon and print both outgoing branches.
    Single(RunArgs),
    /// Run a photon protocol and print its per-photon trace.
    Protocol(RunArgs),
    /// Run protocols over a grid of atom numbers, detunings and field phases.
    Sweep(RunArgs),
    /// Saturated H-photon count versus atom number and single-atom cooperativity.
    Fig3a(RunArgs),
    /// H-photon count versus V photons at fixed collective cooperativity.
    Fig3b(RunArgs),
    /// Spin dynamics with and without photons and field.
    Fig4(RunArgs),
    /// Detuning/field maps after a fixed number of photons, or sample traces.
    #[command(name = "figS2")]
    FigS2(RunArgs),
    /// Run the built-in consistency suites.
    Validate(RunArgs),
}

fn resolve(args: RunArgs) -> Result<Settings, CliError> {
    let base = match &args.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    Ok(base.overlay(args.settings))
}

type Runner = fn(&mut Settings) -> Result<output::Table, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, cmd): (RunArgs, Runner) = match cli.command {
        Command::Single(a) => (a, commands::single),
        Command::Protocol(a) => (a, commands::protocol),
        Command::Sweep(a) => (a, commands::sweep_cmd),
        Command::Fig3a(a) => (a, commands::fig3a),
        Command::Fig3b(a) => (a, commands::fig3b),
        Command::Fig4(a) => (a, commands::fig4),
        Command::FigS2(a) => (a, commands::fig_s2),
        Command::Validate(a) => return validate(resolve(a)?),
    };
    let mut settings = resolve(args)?;
    let table = cmd(&mut settings)?;
    let text = table.render(&settings)?;
    output::emit(&text, settings.output.as_deref())
}

fn validate(mut settings: Settings) -> Result<(), CliError> {
    let (table, report) = commands::validate(&mut settings)?;
    for suite in &report.suites {
        let tag = if suite.passed() { "PASS" } else { "FAIL" };
        eprintln!("{tag} {}", suite.suite);
    }
    if let Some(path) = &settings.report {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        output::emit(&(json + "\n"), Some(path))?;
    }
    let text = match settings.format() {
        Format::Csv => table.render(&settings)?,
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    };
    output::emit(&text, settings.output.as_deref())?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "validation failed: {}",
            report.failures().join("; ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
