mod commands;
mod config;
mod error;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{Axis, Context};
use crate::config::ScenarioConfig;
use crate::error::CliError;

/// Adversarial test synthesis for reach-avoid controllers.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// State as a comma-separated list, e.g. `--state=-0.5,0.5,0.7854`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    state: Option<Vec<f64>>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: current directory; `synth` prints only).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the hardest test at one state.
    Synth,
    /// Tabulate the difficulty over one or two test components.
    Sweep {
        /// Swept components as `index:lo:hi:n`, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        axes: Vec<String>,
    },
    /// Randomized synthesis trials.
    Trials {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Also write per-trial wall-clock times to timing.json.
        #[arg(long)]
        timing: bool,
    },
    /// Closed-loop simulation against a re-synthesizing adversary.
    Simulate {
        /// Simulated seconds; overrides `sim_horizon`.
        #[arg(long)]
        horizon: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut settings = ScenarioConfig::load(&path)?.settings()?;
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }
    let ctx = Context {
        settings,
        state: cli.state,
        out: cli.out,
    };
    match cli.command {
        Command::Synth => commands::synth(&ctx),
        Command::Sweep { axes } => {
            let axes = axes.iter().map(|a| Axis::parse(a)).collect::<Result<Vec<_>, _>>()?;
            commands::sweep(&ctx, &axes)
        }
        Command::Trials { count, timing } => commands::trials(&ctx, count, timing),
        Command::Simulate { horizon } => commands::simulate(&ctx, horizon),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
