//! `sca`: composition analysis from the command line.
//!
//! Subcommands cover the pipeline end to end: `resolve` discovers
//! dependencies, `graph` builds and saves application call graphs,
//! `chains` precomputes per-library sink chains, `reach` runs the full
//! reachability analysis, and `remediate` flags risky upgrades.
//!
//! Exit codes are CI-friendly: 0 success, 1 findings present (with
//! `--fail-on-findings`), 2 input or usage error.

mod commands;
mod config;
mod pipeline;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::FileConfig;

#[derive(Parser)]
#[command(name = "sca", version, about = "Call-graph based software composition analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve dependencies from a manifest against a registry snapshot
    Resolve(commands::resolve::ResolveArgs),
    /// Build the application call graph and report its statistics
    Graph(commands::graph::GraphArgs),
    /// Precompute vulnerable-method call chains for library documents
    Chains(commands::chains::ChainsArgs),
    /// Full reachability analysis: static + dynamic + chains -> findings
    Reach(commands::reach::ReachArgs),
    /// Check whether a library upgrade potentially breaks the application
    Remediate(commands::remediate::RemediateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match FileConfig::from_env() {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Resolve(args) => commands::resolve::run(args, &config),
        Command::Graph(args) => commands::graph::run(args, &config),
        Command::Chains(args) => commands::chains::run(args, &config),
        Command::Reach(args) => commands::reach::run(args, &config),
        Command::Remediate(args) => commands::remediate::run(args, &config),
    };
    match result {
        Ok(findings_present) => {
            if findings_present {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
