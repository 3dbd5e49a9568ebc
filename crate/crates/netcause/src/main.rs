use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netcause::{commands, ExperimentConfig};

/// Average treatment effects with network-proxied confounders.
#[derive(Debug, Parser)]
#[command(name = "netcause", version)]
struct Cli {
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set train.dim=16`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Worker threads for fold training (overrides `threads`).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (overrides `output_dir`).
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate treatments and outcomes on the network.
    Simulate,
    /// Train a label-free embedding checkpoint.
    Embed,
    /// Write out-of-fold nuisance estimates.
    Crossfit,
    /// Cross-fit and report every configured estimator and baseline.
    Estimate,
    /// Re-estimate across levels of exogenous confounding.
    Sweep,
    /// Report the embedding dependence statistic of a checkpoint.
    Diagnose,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = cli.overrides.clone();
    if let Some(t) = cli.threads {
        overrides.push(format!("threads={t}"));
    }
    if let Some(dir) = &cli.out {
        overrides.push(format!("output_dir={:?}", dir.display().to_string()));
    }
    let result = ExperimentConfig::load(cli.config.as_deref(), &overrides).and_then(|cfg| match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Embed => commands::embed(&cfg),
        Command::Crossfit => commands::crossfit(&cfg),
        Command::Estimate => commands::estimate(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Diagnose => commands::diagnose(&cfg),
    });
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for m in &outcome.messages {
                println!("{m}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
