//! Command-line front end: one JSON config per run, four commands.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use factorbt::backtest::ModelKind;

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "factorbt", version, about = "Factor models, LSTM forecasts and walk-forward risk backtests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic market as prices.csv and index.csv
    Generate(RunArgs),
    /// Fit an LSTM on the full panel and save it
    Train(RunArgs),
    /// Walk-forward backtest of each model plus the comparison table
    Backtest(RunArgs),
    /// Walk-forward once per optimisation rung, written to sweep.csv
    Sweep(RunArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// JSON run configuration
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding `output_dir`
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated models to backtest (linear, lstm)
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let args = match &cli.command {
        Command::Generate(a) | Command::Train(a) | Command::Backtest(a) | Command::Sweep(a) => a,
    };
    let cfg = RunConfig::load(&args.config)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let models = args
        .models
        .as_ref()
        .map(|m| m.iter().map(|s| ModelKind::parse(s)).collect::<factorbt::Result<Vec<_>>>())
        .transpose()
        .map_err(|e| CliError::Config(e.to_string()))?;

    match &cli.command {
        Command::Generate(_) => {
            let files = commands::cmd_generate(&cfg, &out)?;
            Ok(files.iter().map(|f| format!("wrote {}\n", f.display())).collect())
        }
        Command::Train(_) => {
            let curve = commands::cmd_train(&cfg, &out)?;
            Ok(format!(
                "trained {} epochs, loss {} -> {}\n",
                curve.len(),
                curve[0],
                curve[curve.len() - 1]
            ))
        }
        Command::Backtest(_) => commands::cmd_backtest(&cfg, &out, models.as_deref()),
        Command::Sweep(_) => commands::cmd_sweep(&cfg, &out),
    }
}

/// Runs one command and returns the process exit code. Output goes to
/// stdout only once the command has finished.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
