use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use gmfg_cli::{load_config, run_experiment, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "gmfg", version, about = "Graphon mean field games on sparse graphs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve for an equilibrium with online mirror descent.
    Solve(Args),
    /// Simulate one finite-population episode.
    Simulate(Args),
    /// Sweep the finite-population error over sparsity and size.
    Sweep(Args),
    /// Sample one graph and report its degree distribution.
    GraphStats(Args),
    /// Estimate the cut norm between two graphons.
    Cutnorm(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::GraphStats(a) => (Command::GraphStats, a),
        Cmd::Cutnorm(a) => (Command::CutNorm, a),
    };
    match execute(command, args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command, args: Args) -> anyhow::Result<Vec<PathBuf>> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    run_experiment(&cfg, command)
}
