mod commands;
mod config;
mod error;
mod input;
mod output;
mod quantity;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ChargeArgs, FitCommand, NoiseArgs, OdmrArgs, Outcome, SimulateArgs, T2Args, VoltageArgs};
use config::{Preset, RunConfig};
use error::CliError;
use output::Format;

/// NV-center spin levels, coherence times and fits under static electric fields.
#[derive(Debug, Parser)]
#[command(name = "nvcoh", version)]
struct Cli {
    /// Flat JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Parameter set to start from; config keys override it
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Random seed; overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues and labels of the 9-level Hamiltonian
    Levels,
    /// Synthetic ODMR spectrum
    Odmr(OdmrArgs),
    /// Analytic coherence times over a sweep of the transverse field
    T2(T2Args),
    /// Resonance lines over a sweep of the transverse field (input format of `fit dperp`)
    Lines(T2Args),
    /// Monte Carlo Ramsey or Hahn-echo decay curve
    Simulate(SimulateArgs),
    /// Fit a CSV data set and write a JSON report
    #[command(subcommand)]
    Fit(FitCommand),
    /// Field of a point charge below a dielectric interface
    ChargeField(ChargeArgs),
    /// Uniform field between two electrodes
    FieldFromVoltage(VoltageArgs),
    /// Sampled Ornstein-Uhlenbeck noise path
    Noise(NoiseArgs),
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut cfg = cli.preset.map(Preset::config).unwrap_or_default();
    if let Some(path) = &cli.config {
        cfg = cfg.overlay(&RunConfig::load(path)?);
    }
    let scenario = {
        let mut s = cfg.resolve()?;
        if let Some(seed) = cli.seed {
            s.seed = seed;
        }
        if cli.out.is_some() {
            s.output = cli.out.clone();
        }
        s
    };
    let table = cli.format.unwrap_or(Format::Csv);
    let single = match cli.format {
        Some(Format::Json) => Format::Json,
        _ => Format::Text,
    };
    let outcome = match &cli.command {
        Command::Levels => commands::levels(&scenario, table)?,
        Command::Odmr(a) => commands::odmr(&scenario, a, table)?,
        Command::T2(a) => commands::t2(&scenario, a, table)?,
        Command::Lines(a) => commands::lines(&scenario, a, table)?,
        Command::Simulate(a) => commands::simulate(&scenario, a, table)?,
        Command::Fit(f) => commands::fit(&scenario, f)?,
        Command::ChargeField(a) => commands::charge_field(a, single)?,
        Command::FieldFromVoltage(a) => commands::field_from_voltage(a, single)?,
        Command::Noise(a) => commands::noise(&scenario, a, table)?,
    };
    output::emit(&outcome.text, scenario.output.as_deref())?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let failure = match run(&cli) {
        Ok(outcome) => outcome.failure,
        Err(e) => Some(e),
    };
    match failure {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("nvcoh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
