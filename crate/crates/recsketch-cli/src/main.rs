//! Experiment harness: every command reads one TOML config and writes its
//! outputs under the configured output directory.

mod commands;
mod config;
mod error;
mod fixtures;
mod results;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;
use error::CliError;

#[derive(Parser)]
#[command(name = "recsketch", version, about = "Recursive sketch experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Run {
    /// TOML run configuration.
    config: PathBuf,
    /// Override the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit δ(d) from isometry or desynchronization noise.
    Calibrate(Run),
    /// Draw a synthetic network.
    GenNetwork(Run),
    /// Sketch the configured network.
    Sketch(Run),
    /// Recovery error sweep.
    Recover(Run),
    /// Sketch-to-sketch inner products.
    Similarity(Run),
    /// Dictionary learning on planted samples or teacher networks.
    LearnDict(Run),
    /// Sketch repository.
    #[command(subcommand)]
    Repo(RepoCommand),
}

#[derive(Subcommand)]
enum RepoCommand {
    Insert(Run),
    Query(Run),
    Cluster(Run),
}

fn load(run: &Run) -> Result<Config, CliError> {
    let mut cfg = Config::load(&run.config)?;
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(o) = &run.output {
        cfg.output = o.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Calibrate(r) => load(r).and_then(|c| commands::calibrate(&c)),
        Command::GenNetwork(r) => load(r).and_then(|c| commands::gen_network(&c)),
        Command::Sketch(r) => load(r).and_then(|c| commands::sketch_cmd(&c)),
        Command::Recover(r) => load(r).and_then(|c| commands::recover(&c)),
        Command::Similarity(r) => load(r).and_then(|c| commands::similarity(&c)),
        Command::LearnDict(r) => load(r).and_then(|c| commands::learn(&c)),
        Command::Repo(RepoCommand::Insert(r)) => load(r).and_then(|c| commands::repo_insert(&c)),
        Command::Repo(RepoCommand::Query(r)) => load(r).and_then(|c| commands::repo_query(&c)),
        Command::Repo(RepoCommand::Cluster(r)) => load(r).and_then(|c| commands::repo_cluster(&c)),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("recsketch: {e}");
            e.exit_code()
        }
    }
}
