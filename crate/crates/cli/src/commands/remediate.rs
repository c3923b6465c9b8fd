//! `sca remediate`: semantic diff between two library versions plus the
//! breaking-change check against the application's call graph. The app
//! graph comes either from a saved graph file (`--app-graph`, produced
//! by `sca graph --output`) or is built from `--program` and friends.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use sca_core::formats::{self, emit_report, FindingsReport};
use sca_core::remediate::{check_breaking, diff_versions, semantic_closure, GraphMode, Verdict};
use sca_core::{chains, CallGraph, EntryPointSet, Provenance};

use crate::config::FileConfig;
use crate::pipeline::{
    build_origin_map, emit, read, BuiltGraphs, FormatArg, GraphModeArg, MergeModeArg,
};

#[derive(Args)]
pub struct RemediateArgs {
    /// Library document of the version currently in use
    #[arg(long)]
    from: PathBuf,
    /// Library document of the upgrade candidate
    #[arg(long)]
    to: PathBuf,
    /// Saved application graph (see `sca graph --output`)
    #[arg(long = "app-graph")]
    app_graph: Option<PathBuf>,
    /// Application program document, to build the graph in-process
    #[arg(long)]
    program: Option<PathBuf>,
    /// Execution traces (repeatable)
    #[arg(long)]
    trace: Vec<PathBuf>,
    /// Chain files or directories of them (repeatable)
    #[arg(long)]
    chains: Vec<PathBuf>,
    /// Origin rule file classifying namespaces
    #[arg(long)]
    origins: Option<PathBuf>,
    /// Framework namespace prefix (repeatable)
    #[arg(long = "framework-prefix")]
    framework_prefixes: Vec<String>,
    /// Keep only entry points with this method name
    #[arg(long = "entrypoint-filter")]
    entrypoint_filter: Option<String>,
    /// Which application graph the check runs against
    #[arg(long = "mode", visible_alias = "graph-mode", value_enum)]
    mode: Option<GraphModeArg>,
    /// How chains are merged when building in-process
    #[arg(long = "merge-mode", value_enum)]
    merge_mode: Option<MergeModeArg>,
    /// Report format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Exit 1 when the upgrade is potentially breaking
    #[arg(long = "fail-on-findings")]
    fail_on_findings: bool,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Restricts a saved (possibly combined) graph to the edges the mode
/// admits, then prunes to what the surviving entry points still reach.
fn filter_saved_graph(
    graph: &CallGraph,
    entry_points: &EntryPointSet,
    mode: GraphMode,
) -> (CallGraph, EntryPointSet) {
    let keep: &[Provenance] = match mode {
        GraphMode::StaticOnly => &[Provenance::Static, Provenance::Chain],
        GraphMode::DynamicOnly => &[Provenance::Dynamic, Provenance::Chain],
        GraphMode::Combined => &[Provenance::Static, Provenance::Dynamic, Provenance::Chain],
    };
    let filtered = graph.filter_provenance(keep);
    let roots: EntryPointSet = entry_points
        .iter()
        .filter(|m| filtered.contains_vertex(m))
        .cloned()
        .collect();
    (filtered.prune_unreachable(roots.iter()), roots)
}

pub fn run(args: RemediateArgs, config: &FileConfig) -> Result<bool> {
    let from = formats::load_program(&read(&args.from)?)
        .with_context(|| format!("parsing {}", args.from.display()))?;
    let to = formats::load_program(&read(&args.to)?)
        .with_context(|| format!("parsing {}", args.to.display()))?;

    let diff = diff_versions(&from, &to)?;
    let old_graph = chains::library_graph(&from)?;
    let sem = semantic_closure(diff, &old_graph);

    let mode = args
        .mode
        .or_else(|| GraphModeArg::from_config(config))
        .unwrap_or(GraphModeArg::Combined)
        .graph_mode();

    let (app, entry_points) = match (&args.app_graph, &args.program) {
        (Some(path), None) => {
            let (graph, entry_points) = formats::load_graph(&read(path)?)
                .with_context(|| format!("parsing graph file {}", path.display()))?;
            filter_saved_graph(&graph, &entry_points, mode)
        }
        (None, Some(program)) => {
            let map = build_origin_map(args.origins.as_deref(), &args.framework_prefixes, config)?;
            let entry_filter =
                args.entrypoint_filter.clone().or_else(|| config.entrypoint_filter.clone());
            let merge_mode = args
                .merge_mode
                .or_else(|| MergeModeArg::from_config(config))
                .unwrap_or(MergeModeArg::Fold)
                .merge_mode();
            let built =
                BuiltGraphs::build(program, &args.trace, &args.chains, &map, entry_filter, merge_mode)?;
            let view = built.view(mode)?;
            (view.graph, view.entry_points)
        }
        (Some(_), Some(_)) => bail!("--app-graph and --program are mutually exclusive"),
        (None, None) => bail!("one of --app-graph or --program is required"),
    };

    let breaking = check_breaking(&app, &entry_points, &sem, mode);
    let findings_present =
        args.fail_on_findings && breaking.verdict == Verdict::PotentiallyBreaking;

    let report = FindingsReport { breaking: Some(breaking), ..FindingsReport::default() };
    let format = args.format.or_else(|| FormatArg::from_config(config)).unwrap_or(FormatArg::Json);
    emit(args.output.as_deref(), &emit_report(&report, format.report_format()))?;
    Ok(findings_present)
}
