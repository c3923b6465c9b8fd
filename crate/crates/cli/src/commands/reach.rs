//! `sca reach`: the full analysis. Builds the static graph, ingests
//! traces, merges precomputed chains, resolves the present libraries,
//! and reports which vulnerability sinks are reachable.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use sca_core::compose::reachable_sinks;
use sca_core::depres;
use sca_core::formats::{self, emit_report, FindingsReport};
use sca_core::Coordinate;

use crate::commands::resolve::ResolveModeArg;
use crate::config::FileConfig;
use crate::pipeline::{
    build_origin_map, emit, read, BuiltGraphs, FormatArg, GraphModeArg, MergeModeArg,
};

#[derive(Args)]
pub struct ReachArgs {
    /// Application program document
    #[arg(long)]
    program: PathBuf,
    /// Execution traces (repeatable)
    #[arg(long)]
    trace: Vec<PathBuf>,
    /// Chain files or directories of them (repeatable)
    #[arg(long)]
    chains: Vec<PathBuf>,
    /// Vulnerability database
    #[arg(long)]
    vulndb: PathBuf,
    /// Origin rule file classifying namespaces
    #[arg(long)]
    origins: Option<PathBuf>,
    /// Framework namespace prefix (repeatable)
    #[arg(long = "framework-prefix")]
    framework_prefixes: Vec<String>,
    /// Keep only entry points with this method name
    #[arg(long = "entrypoint-filter")]
    entrypoint_filter: Option<String>,
    /// Dependency manifest, resolved against --registry to decide which
    /// libraries are present
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Registry snapshot
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Lockfile replayed against --registry (wins over --manifest)
    #[arg(long)]
    lockfile: Option<PathBuf>,
    /// Resolution semantics when --manifest is given
    #[arg(long, value_enum, default_value = "maven")]
    mode: ResolveModeArg,
    /// How chains are merged
    #[arg(long = "merge-mode", value_enum)]
    merge_mode: Option<MergeModeArg>,
    /// Which graph the findings are computed on
    #[arg(long = "graph-mode", value_enum)]
    graph_mode: Option<GraphModeArg>,
    /// Report format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Exit 1 when reachable findings exist
    #[arg(long = "fail-on-findings")]
    fail_on_findings: bool,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

fn resolve_present(
    args: &ReachArgs,
) -> Result<Option<depres::ResolutionResult>> {
    let registry = match &args.registry {
        Some(path) => formats::load_registry(&read(path)?)
            .with_context(|| format!("parsing registry {}", path.display()))?,
        None => {
            if args.lockfile.is_some() || args.manifest.is_some() {
                anyhow::bail!("--manifest/--lockfile need --registry to resolve against");
            }
            return Ok(None);
        }
    };
    if let Some(path) = &args.lockfile {
        let lock = formats::load_lockfile(&read(path)?)
            .with_context(|| format!("parsing lockfile {}", path.display()))?;
        return Ok(Some(depres::replay_lockfile(&lock, &registry)?));
    }
    let Some(path) = &args.manifest else {
        return Ok(None);
    };
    let manifest = formats::load_manifest(&read(path)?)
        .with_context(|| format!("parsing manifest {}", path.display()))?;
    let result = match args.mode {
        ResolveModeArg::Declared => depres::resolve_declared(&manifest, &registry),
        ResolveModeArg::Maven => depres::resolve_maven(&manifest, &registry)?,
        ResolveModeArg::Npm => depres::resolve_npm(&manifest, &registry)?,
        ResolveModeArg::Lockfile => anyhow::bail!("mode lockfile requires --lockfile"),
    };
    Ok(Some(result))
}

pub fn run(args: ReachArgs, config: &FileConfig) -> Result<bool> {
    let map = build_origin_map(args.origins.as_deref(), &args.framework_prefixes, config)?;
    let entry_filter =
        args.entrypoint_filter.clone().or_else(|| config.entrypoint_filter.clone());
    let merge_mode = args
        .merge_mode
        .or_else(|| MergeModeArg::from_config(config))
        .unwrap_or(MergeModeArg::Fold)
        .merge_mode();
    let built =
        BuiltGraphs::build(&args.program, &args.trace, &args.chains, &map, entry_filter, merge_mode)?;

    let vulndb = formats::load_vulndb(&read(&args.vulndb)?)
        .with_context(|| format!("parsing vulnerability database {}", args.vulndb.display()))?;

    // Which libraries are present: resolution output when we have one,
    // otherwise the coordinates of the loaded chain files.
    let resolution = resolve_present(&args)?;
    let present: BTreeSet<Coordinate> = match &resolution {
        Some(result) => result.coordinates.clone(),
        None => built.chain_coordinates(),
    };

    let graph_mode = args
        .graph_mode
        .or_else(|| GraphModeArg::from_config(config))
        .unwrap_or(GraphModeArg::Combined)
        .graph_mode();
    let view = built.view(graph_mode)?;
    let findings = reachable_sinks(&view.graph, &vulndb, &present, &view.entry_points);

    let mut stats = built.stats(Some(&vulndb), &present, true)?;
    stats.merge = Some(view.merge);

    let findings_present = args.fail_on_findings && findings.iter().any(|f| f.reachable());
    let report = FindingsReport {
        findings,
        resolution,
        graph_stats: Some(stats),
        ..FindingsReport::default()
    };
    let format = args.format.or_else(|| FormatArg::from_config(config)).unwrap_or(FormatArg::Json);
    emit(args.output.as_deref(), &emit_report(&report, format.report_format()))?;
    Ok(findings_present)
}
