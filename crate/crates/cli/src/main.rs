use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use symreg_cli::{cmd_grid, cmd_run, cmd_trace, load_config, resolve};

#[derive(Parser)]
#[command(name = "symreg", version, about = "Neural-guided symbolic regression experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        /// Experiment config (strict schema; unknown keys are rejected).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's worker count.
        #[arg(long)]
        workers: Option<usize>,
        /// Override any config field by dotted path, e.g. train.batch_size=500.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Derive plot-ready CSVs from a finished run directory.
    Trace {
        /// A run directory containing steps.jsonl.
        dir: PathBuf,
    },
    /// Sweep a variant's hyperparameter grid on one benchmark.
    Grid {
        #[arg(long)]
        variant: String,
        #[arg(long)]
        benchmark: String,
        /// Runs per grid configuration.
        #[arg(long, default_value_t = 3)]
        runs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Override base training fields, e.g. train.max_steps=500.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, seed, out, workers, set } => load_config(&config, &set)
            .and_then(|mut config| {
                if let Some(seed) = seed {
                    config.seed = seed;
                }
                if let Some(out) = out {
                    config.out = out;
                }
                if let Some(workers) = workers {
                    config.workers = workers;
                }
                resolve(&config)
            })
            .and_then(|resolved| cmd_run(&resolved)),
        Command::Trace { dir } => cmd_trace(&dir),
        Command::Grid { variant, benchmark, runs, seed, out, workers, set } => {
            cmd_grid(&variant, &benchmark, runs, seed, &out, workers, &set)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
