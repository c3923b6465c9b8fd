//! `sca graph`: build the application call graph, report statistics,
//! and optionally save the graph for later use (e.g. `sca remediate
//! --app-graph`).

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use sca_core::formats::{self, emit_report, FindingsReport};

use crate::config::FileConfig;
use crate::pipeline::{build_origin_map, read, BuiltGraphs, FormatArg, GraphModeArg, MergeModeArg};

#[derive(Args)]
pub struct GraphArgs {
    /// Application program document
    #[arg(long)]
    program: PathBuf,
    /// Execution traces (repeatable); enables the dynamic columns
    #[arg(long)]
    trace: Vec<PathBuf>,
    /// Chain files or directories of them (repeatable)
    #[arg(long)]
    chains: Vec<PathBuf>,
    /// Vulnerability database; enables the sink columns
    #[arg(long)]
    vulndb: Option<PathBuf>,
    /// Origin rule file classifying namespaces
    #[arg(long)]
    origins: Option<PathBuf>,
    /// Framework namespace prefix (repeatable)
    #[arg(long = "framework-prefix")]
    framework_prefixes: Vec<String>,
    /// Keep only entry points with this method name
    #[arg(long = "entrypoint-filter")]
    entrypoint_filter: Option<String>,
    /// Include per-pass diagnostics and sink counts in the statistics
    #[arg(long)]
    stats: bool,
    /// Which graph view to save with --output
    #[arg(long = "graph-mode", value_enum)]
    graph_mode: Option<GraphModeArg>,
    /// How chains are merged
    #[arg(long = "merge-mode", value_enum)]
    merge_mode: Option<MergeModeArg>,
    /// Report format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Save the selected graph view as graph.json
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn run(args: GraphArgs, config: &FileConfig) -> Result<bool> {
    let map = build_origin_map(args.origins.as_deref(), &args.framework_prefixes, config)?;
    let entry_filter = args.entrypoint_filter.or_else(|| config.entrypoint_filter.clone());
    let merge_mode = args
        .merge_mode
        .or_else(|| MergeModeArg::from_config(config))
        .unwrap_or(MergeModeArg::Fold)
        .merge_mode();
    let built = BuiltGraphs::build(&args.program, &args.trace, &args.chains, &map, entry_filter, merge_mode)?;

    let vulndb = match &args.vulndb {
        Some(path) => Some(
            formats::load_vulndb(&read(path)?)
                .with_context(|| format!("parsing vulnerability database {}", path.display()))?,
        ),
        None => None,
    };
    let present = built.chain_coordinates();
    let stats = built.stats(vulndb.as_ref(), &present, args.stats)?;

    if let Some(output) = &args.output {
        let mode = args
            .graph_mode
            .or_else(|| GraphModeArg::from_config(config))
            .unwrap_or(GraphModeArg::StaticOnly)
            .graph_mode();
        let view = built.view(mode)?;
        std::fs::write(output, formats::save_graph(&view.graph, &view.entry_points))
            .with_context(|| format!("writing {}", output.display()))?;
    }

    let report = FindingsReport { graph_stats: Some(stats), ..FindingsReport::default() };
    let format = args.format.or_else(|| FormatArg::from_config(config)).unwrap_or(FormatArg::Json);
    // the report goes to stdout; --output is reserved for the graph file
    print!("{}", emit_report(&report, format.report_format()));
    Ok(false)
}
