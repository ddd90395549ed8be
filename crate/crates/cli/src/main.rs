//! `genmom` command-line driver.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage or configuration
//! error, 3 a declared check failed.

mod args;
mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;

use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use config::ScenarioConfig;
use failure::Failure;

fn main() {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(f) = run(cli) {
        let kind = match f {
            Failure::Config(_) => "configuration error",
            Failure::Compute(_) => "computation error",
            Failure::Check(_) => "check failed",
        };
        eprintln!("genmom: {kind}: {f}");
        std::process::exit(f.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(threads) = cli.threads.or(cfg.run.threads) {
        if threads == 0 {
            return Err(Failure::Config("`threads` must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot start thread pool: {e}")))?;
    }
    let ctx = Context {
        out_dir: cli.out_dir.or(cfg.run.out_dir).unwrap_or_else(|| PathBuf::from(".")),
        seed: cli.seed.or(cfg.run.seed).unwrap_or(0),
    };
    match cli.command {
        Command::Exact { args, flow } => commands::exact::run(args.overlay(cfg.exact), flow.overlay(cfg.flow), &ctx),
        Command::Momenta(args) => commands::momenta::run(args.overlay(cfg.momenta), &ctx),
        Command::Bounds(args) => commands::bounds::run(args.overlay(cfg.bounds), &ctx),
        Command::Volume { args, flow } => commands::volume::run(args.overlay(cfg.volume), flow.overlay(cfg.flow), &ctx),
        Command::Simulate(args) => commands::simulate::run(args.overlay(cfg.simulate), &ctx),
        Command::Verify(args) => commands::verify::run(args.overlay(cfg.verify), &ctx),
    }
}
