//! `vanhove`: command-line frontend for the van Hove workbench.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::RunConfig;
use crate::report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] vanhove_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 1 otherwise.
    fn exit_code(&self) -> u8 {
        use vanhove_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(E::InvalidParameter(_) | E::SourceNotAdmissible(_) | E::InsufficientData { .. }) => 2,
            CliError::Core(E::Truncation(_) | E::Calibration(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vanhove", version, about = "Van Hove field-theory workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the CSV table and JSON summary.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides, `key=value`.
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Infrared class of the source.
    Classify(RunArgs),
    /// Ground-state energy and conservation along the classical flow.
    Energy(RunArgs),
    /// Coherent-state evolution samples.
    Evolve(RunArgs),
    /// KMS identity for quantum Gibbs states.
    Kms(RunArgs),
    /// Spectral-window test of the ground state.
    Groundstate(RunArgs),
    /// Egorov sweep over the hbar ladder.
    Egorov(RunArgs),
    /// Equilibrium sweep in the configured regime.
    Equilibrium(RunArgs),
    /// Decay probe, wave-operator round trip and transported sweep.
    Scattering(RunArgs),
    /// Spectrum of a truncated single mode.
    FockSpectrum(RunArgs),
    /// Number and energy along an infrared cutoff sweep.
    SoftPhotons(RunArgs),
    /// Lower bounds for Weyl and anti-Wick quantizations.
    Garding(RunArgs),
    /// Every configuration key with its default.
    Keys,
}

type Runner = fn(&RunConfig) -> Result<Report, CliError>;

impl Command {
    fn split(&self) -> Option<(&'static str, Runner, &RunArgs)> {
        Some(match self {
            Command::Classify(a) => ("classify", commands::classify_cmd, a),
            Command::Energy(a) => ("energy", commands::energy, a),
            Command::Evolve(a) => ("evolve", commands::evolve, a),
            Command::Kms(a) => ("kms", commands::kms, a),
            Command::Groundstate(a) => ("groundstate", commands::groundstate, a),
            Command::Egorov(a) => ("egorov", commands::egorov, a),
            Command::Equilibrium(a) => ("equilibrium", commands::equilibrium, a),
            Command::Scattering(a) => ("scattering", commands::scattering, a),
            Command::FockSpectrum(a) => ("fock-spectrum", commands::fock_spectrum, a),
            Command::SoftPhotons(a) => ("soft-photons", commands::soft_photons, a),
            Command::Garding(a) => ("garding", commands::garding, a),
            Command::Keys => return None,
        })
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("VANHOVE_THREADS") else {
        return Ok(());
    };
    let n: usize = text.trim().parse().map_err(|_| CliError::Config(format!("VANHOVE_THREADS={text:?} is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let Some((name, runner, args)) = cli.command.split() else {
        for (k, v, help) in config::KEYS {
            println!("{k}={v}\t{help}");
        }
        return Ok(true);
    };
    init_threads()?;
    let cfg = RunConfig::load(args.config.as_deref(), &args.overrides)?;
    let report = runner(&cfg)?;
    report.write(&args.out, name, &cfg)?;
    let summary = serde_json::to_string(&report.json(name, &cfg)).map_err(std::io::Error::other)?;
    println!("{summary}");
    for check in &report.checks {
        eprintln!("[{}] {}: {}", if check.ok { "ok" } else { "FAIL" }, check.name, check.detail);
    }
    let failed = report.failed();
    for check in &failed {
        eprintln!("assertion failed: {}", check.name);
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
