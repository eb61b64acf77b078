use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anisoscat::cli::{run_scenario, Experiment, RunOptions, ScenarioConfig};
use anisoscat::Error;

#[derive(Parser)]
#[command(name = "anisoscat", version, about = "Scattering experiments for block-anisotropic dispersive Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for ensemble and ladder loops.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Admissibility classification.
    Admit,
    /// Plain time evolution.
    Evolve,
    /// Weighted-norm decay of an outgoing/incoming component.
    DecayFit,
    /// Kato smoothness integral.
    Smooth,
    /// Wave operator by Cook's method or, with an envelope, the time-dependent limit.
    Waveop,
    /// Invariance principle comparison.
    Invariance,
    /// Periodic wave operator through the monodromy.
    Monodromy,
    /// Discrete spectrum and accumulation ladder.
    Spectrum,
    /// Runs whatever experiment the file names.
    Scenario { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, path) = match cli.command {
        Command::Scenario { file } => (None, Some(file)),
        other => {
            let e = match other {
                Command::Admit => Experiment::Admit,
                Command::Evolve => Experiment::Evolve,
                Command::DecayFit => Experiment::DecayFit,
                Command::Smooth => Experiment::Smooth,
                Command::Waveop => Experiment::Waveop,
                Command::Invariance => Experiment::Invariance,
                Command::Monodromy => Experiment::Monodromy,
                Command::Spectrum => Experiment::Spectrum,
                Command::Scenario { .. } => unreachable!(),
            };
            (Some(e), cli.common.config.clone())
        }
    };
    let result = path
        .ok_or_else(|| Error::config("--config", "no scenario file given"))
        .and_then(|p| ScenarioConfig::load(&p))
        .and_then(|cfg| {
            run_scenario(
                cfg,
                &RunOptions {
                    experiment,
                    seed: cli.common.seed,
                    out: cli.common.out.clone(),
                    threads: cli.common.threads,
                    quiet: cli.common.quiet,
                },
            )
        });
    match result {
        Ok(out) => {
            if !cli.common.quiet {
                for line in &out.log {
                    println!("{line}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
