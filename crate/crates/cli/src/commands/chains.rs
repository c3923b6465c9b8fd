//! `sca chains`: precompute vulnerable-method call chains for one or
//! more library documents. Libraries are independent, so multiple
//! documents are processed concurrently.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use sca_core::chains::{enumerate_chains, library_graph, ChainLimits, LibrarySurface};
use sca_core::formats::{self, save_chains};
use sca_core::{Coordinate, MethodRef};

use crate::config::FileConfig;
use crate::pipeline::read;

#[derive(Args)]
pub struct ChainsArgs {
    /// Library program documents (repeatable)
    #[arg(long, required = true)]
    program: Vec<PathBuf>,
    /// Vulnerability database supplying the sinks
    #[arg(long)]
    vulndb: PathBuf,
    /// Maximum chain length in edges
    #[arg(long = "max-chain-length")]
    max_chain_length: Option<usize>,
    /// Maximum number of chains per sink
    #[arg(long = "max-chains-per-sink")]
    max_chains_per_sink: Option<usize>,
    /// Output chain file (single --program only)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output directory, one chain file per library
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct LibrarySummary {
    library: Coordinate,
    chains: usize,
    truncated_sinks: Vec<MethodRef>,
    missing_sinks: Vec<MethodRef>,
    unreachable_sinks: Vec<MethodRef>,
    output: String,
}

#[derive(Serialize)]
struct ChainsSummary {
    libraries: Vec<LibrarySummary>,
}

fn file_name_for(coordinate: &Coordinate) -> String {
    format!("{}__{}__{}.json", coordinate.group, coordinate.artifact, coordinate.version)
}

fn precompute(
    path: &Path,
    vulndb: &formats::VulnDbDocument,
    limits: ChainLimits,
) -> Result<(formats::ChainFile, sca_core::chains::ChainDiagnostics)> {
    let library = formats::load_program(&read(path)?)
        .with_context(|| format!("parsing library {}", path.display()))?;
    let coordinate = library
        .coordinate()
        .ok_or_else(|| anyhow::anyhow!("{} is not a library document", path.display()))?
        .clone();
    let graph = library_graph(&library)?;
    let surface = LibrarySurface::public_methods(&library);
    let sinks = vulndb.sinks_for(&coordinate);
    Ok(enumerate_chains(&graph, &surface, &sinks, limits, &coordinate))
}

pub fn run(args: ChainsArgs, config: &FileConfig) -> Result<bool> {
    let vulndb = formats::load_vulndb(&read(&args.vulndb)?)
        .with_context(|| format!("parsing vulnerability database {}", args.vulndb.display()))?;
    let limits = ChainLimits::new(
        args.max_chain_length
            .or(config.max_chain_length)
            .unwrap_or(ChainLimits::DEFAULT_MAX_LENGTH),
        args.max_chains_per_sink
            .or(config.max_chains_per_sink)
            .unwrap_or(ChainLimits::DEFAULT_MAX_CHAINS_PER_SINK),
    )?;
    if args.program.len() > 1 && args.output.is_some() {
        bail!("--output fits a single --program; use --out-dir for several");
    }

    // Each library is independent; fan out across threads.
    let results: Vec<Result<_>> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .program
            .iter()
            .map(|path| {
                let vulndb = &vulndb;
                scope.spawn(move || precompute(path, vulndb, limits))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("precompute thread panicked")).collect()
    });

    let mut summaries = Vec::new();
    for result in results {
        let (file, diagnostics) = result?;
        let text = save_chains(&file)?;
        let destination = if let Some(output) = &args.output {
            output.clone()
        } else {
            let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
            dir.join(file_name_for(&file.library))
        };
        std::fs::write(&destination, text)
            .with_context(|| format!("writing {}", destination.display()))?;
        summaries.push(LibrarySummary {
            library: file.library.clone(),
            chains: file.chains.len(),
            truncated_sinks: diagnostics.truncated_sinks,
            missing_sinks: diagnostics.missing_sinks,
            unreachable_sinks: diagnostics.unreachable_sinks,
            output: destination.display().to_string(),
        });
    }
    summaries.sort_by(|a, b| a.library.cmp(&b.library));

    let summary = ChainsSummary { libraries: summaries };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(false)
}
