use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pileup_cli::config::{Command, Format};
use pileup_cli::{parse_config, run, CliError};
use pileup_core::scaling::Regime;

/// Equilibrium pile-ups of dislocation walls: discrete solves, continuum
/// limits and their comparison.
#[derive(Debug, Parser)]
#[command(name = "pileup", version)]
struct Cli {
    /// Command to run; may instead be given as `command` in the config.
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Concurrent sweep instances (0 = one per core).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Residual tolerance of the discrete solver, relative to sigma.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Fraction of the support trimmed at each end for bulk metrics.
    #[arg(long)]
    exclusion: Option<f64>,
    /// Regime index 1..5 used instead of the classifier.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    regime: Option<u8>,
    /// Accepted for compatibility; every computation is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let source = std::fs::read_to_string(&cli.config).map_err(|e| CliError::config("<file>", e.to_string()))?;
    let mut config = parse_config(&source, cli.command)?;
    if let Some(path) = &cli.out {
        config.output.path = Some(path.to_string_lossy().into_owned());
    }
    if let Some(format) = cli.format {
        config.output.format = format;
    }
    if let Some(t) = cli.tolerance {
        config.settings.solve.residual_tolerance = t;
    }
    if let Some(f) = cli.exclusion {
        config.settings.exclusion = f;
    }
    if let Some(i) = cli.regime {
        config.settings.regime = Regime::from_index(i);
    }
    if cli.seed.is_some() {
        log::debug!("--seed ignored: no randomness in any command");
    }
    run(&config, cli.jobs)
}
