mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

/// Swendsen-Wang sampling with double flip moves.
#[derive(Debug, Parser)]
#[command(name = "clusterflip", version)]
struct Cli {
    /// Suppress progress and report output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the configured lattice and write it as a graph file.
    BuildLattice(ConfigArg),
    /// Run the configured chain and write its trace and summary.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Independent chains on streams 0..n.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        replicas: u32,
    },
    /// Check the exact identities; without a config, runs the bundled suite.
    OracleCheck {
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
    /// Write the greedy matching for the configured involution.
    MatchingReport(ConfigArg),
}

/// Worker cap from `CLUSTERFLIP_THREADS`, defaulting to the core count.
fn thread_cap() -> Result<usize, CliError> {
    match std::env::var("CLUSTERFLIP_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("CLUSTERFLIP_THREADS must be a positive integer, found `{v}`"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, usize::from)),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let threads = thread_cap()?;
    // The oracle enumerations use the global pool.
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().ok();
    let mut ctx = Context { quiet: cli.quiet, replicas: 1, threads };
    match cli.command {
        Command::BuildLattice(arg) => commands::build_lattice(&ExperimentConfig::load(&arg.config)?, &ctx),
        Command::Run { config, replicas } => {
            ctx.replicas = replicas as usize;
            commands::run(&ExperimentConfig::load(&config.config)?, &ctx)
        }
        Command::OracleCheck { config } => {
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            commands::oracle_check(cfg.as_ref(), &ctx)
        }
        Command::MatchingReport(arg) => commands::matching_report(&ExperimentConfig::load(&arg.config)?, &ctx),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("clusterflip: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
