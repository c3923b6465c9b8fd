//! Shared graph-building plumbing for the `graph`, `reach`, and
//! `remediate` subcommands: origin-map assembly, chain-file loading,
//! and the three graph views (static-only, dynamic-only, combined).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

use sca_core::compose::{self, MergeDiagnostics, MergeMode};
use sca_core::dynamic_cg::{build_dynamic, DynamicBuild};
use sca_core::formats::{self, ChainFile, ReportFormat};
use sca_core::remediate::GraphMode;
use sca_core::static_cg::{build_static, StaticBuild, StaticConfig};
use sca_core::{CallGraph, Coordinate, EntryPointSet, Origin, OriginMap};

use crate::config::FileConfig;

/// Framework namespaces recognized out of the box; explicit rules from
/// flags or the origins file take precedence.
pub const DEFAULT_FRAMEWORK_PREFIXES: &[&str] = &["org.junit.", "junit.", "org.testng."];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Markdown,
}

impl FormatArg {
    pub fn report_format(self) -> ReportFormat {
        match self {
            FormatArg::Json => ReportFormat::Machine,
            FormatArg::Markdown => ReportFormat::Human,
        }
    }

    pub fn from_config(config: &FileConfig) -> Option<FormatArg> {
        match config.format.as_deref() {
            Some("json") => Some(FormatArg::Json),
            Some("markdown") => Some(FormatArg::Markdown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MergeModeArg {
    Fold,
    Fixpoint,
}

impl MergeModeArg {
    pub fn merge_mode(self) -> MergeMode {
        match self {
            MergeModeArg::Fold => MergeMode::Fold,
            MergeModeArg::Fixpoint => MergeMode::Fixpoint,
        }
    }

    pub fn from_config(config: &FileConfig) -> Option<MergeModeArg> {
        match config.merge_mode.as_deref() {
            Some("fold") => Some(MergeModeArg::Fold),
            Some("fixpoint") => Some(MergeModeArg::Fixpoint),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphModeArg {
    StaticOnly,
    DynamicOnly,
    Combined,
}

impl GraphModeArg {
    pub fn graph_mode(self) -> GraphMode {
        match self {
            GraphModeArg::StaticOnly => GraphMode::StaticOnly,
            GraphModeArg::DynamicOnly => GraphMode::DynamicOnly,
            GraphModeArg::Combined => GraphMode::Combined,
        }
    }

    pub fn from_config(config: &FileConfig) -> Option<GraphModeArg> {
        match config.graph_mode.as_deref() {
            Some("static-only") => Some(GraphModeArg::StaticOnly),
            Some("dynamic-only") => Some(GraphModeArg::DynamicOnly),
            Some("combined") => Some(GraphModeArg::Combined),
            _ => None,
        }
    }
}

pub fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

/// Assembles the origin map: framework prefixes from flags first, then
/// the origins file, then the config file's rules, then the shipped
/// framework defaults as a fallback.
pub fn build_origin_map(
    origins: Option<&Path>,
    framework_prefixes: &[String],
    config: &FileConfig,
) -> Result<OriginMap> {
    let mut map = OriginMap::default();
    for prefix in framework_prefixes {
        map.push_rule(prefix.clone(), Origin::Framework(prefix.clone()));
    }
    for prefix in &config.framework_prefixes {
        map.push_rule(prefix.clone(), Origin::Framework(prefix.clone()));
    }
    if let Some(path) = origins {
        let loaded = formats::load_origins(&read(path)?)
            .with_context(|| format!("parsing origins file {}", path.display()))?;
        map.rules.extend(loaded.rules);
    }
    if let Some(loaded) = &config.origins {
        map.rules.extend(loaded.rules.iter().cloned());
    }
    for prefix in DEFAULT_FRAMEWORK_PREFIXES {
        map.push_rule(*prefix, Origin::Framework((*prefix).to_string()));
    }
    Ok(map)
}

/// Loads chain files from files or directories (directory entries are
/// taken in name order), keeping the overall order deterministic.
pub fn load_chain_files(paths: &[PathBuf]) -> Result<Vec<ChainFile>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(path)
                .with_context(|| format!("reading chain directory {}", path.display()))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                .collect();
            entries.sort();
            for entry in entries {
                files.push(load_chain_file(&entry)?);
            }
        } else {
            files.push(load_chain_file(path)?);
        }
    }
    Ok(files)
}

fn load_chain_file(path: &Path) -> Result<ChainFile> {
    formats::load_chains(&read(path)?).with_context(|| format!("parsing chain file {}", path.display()))
}

/// Everything the graph-consuming commands need, built once.
pub struct BuiltGraphs {
    pub static_build: StaticBuild,
    pub dynamic: Option<DynamicBuild>,
    pub chain_files: Vec<ChainFile>,
    pub merge_mode: MergeMode,
}

/// One selected view over the built graphs: the merged graph, the entry
/// points rooting it, and the chain-merge diagnostics.
pub struct GraphView {
    pub graph: CallGraph,
    pub entry_points: EntryPointSet,
    pub merge: MergeDiagnostics,
}

impl BuiltGraphs {
    pub fn build(
        program: &Path,
        traces: &[PathBuf],
        chains: &[PathBuf],
        map: &OriginMap,
        entry_filter: Option<String>,
        merge_mode: MergeMode,
    ) -> Result<BuiltGraphs> {
        let app = formats::load_program(&read(program)?)
            .with_context(|| format!("parsing program {}", program.display()))?;
        let static_build = build_static(&app, map, &StaticConfig { entry_point_filter: entry_filter })
            .with_context(|| format!("building static graph for {}", program.display()))?;

        let dynamic = if traces.is_empty() {
            None
        } else {
            let mut docs = Vec::new();
            for path in traces {
                docs.push(
                    formats::load_trace(&read(path)?)
                        .with_context(|| format!("parsing trace {}", path.display()))?,
                );
            }
            Some(build_dynamic(&docs, map))
        };

        Ok(BuiltGraphs { static_build, dynamic, chain_files: load_chain_files(chains)?, merge_mode })
    }

    /// Coordinates of all loaded chain files: the fallback set of
    /// "present" libraries when no resolution inputs were given.
    pub fn chain_coordinates(&self) -> BTreeSet<Coordinate> {
        self.chain_files.iter().map(|f| f.library.clone()).collect()
    }

    /// Builds the requested graph view. Chains are merged into whatever
    /// base graph the mode selects.
    pub fn view(&self, mode: GraphMode) -> Result<GraphView> {
        let empty = CallGraph::new();
        let (base, entry_points) = match mode {
            GraphMode::StaticOnly => (self.static_build.graph.clone(), self.static_build.entry_points.clone()),
            GraphMode::DynamicOnly => match &self.dynamic {
                Some(dynamic) => (dynamic.graph.clone(), dynamic.roots.clone()),
                None => bail!("graph mode dynamic-only requires at least one --trace"),
            },
            GraphMode::Combined => {
                let (dynamic_graph, roots) = match &self.dynamic {
                    Some(dynamic) => (&dynamic.graph, dynamic.roots.clone()),
                    None => (&empty, EntryPointSet::default()),
                };
                (
                    compose::union(&self.static_build.graph, dynamic_graph),
                    self.static_build.entry_points.merged(&roots),
                )
            }
        };
        let (graph, merge) = compose::merge_chains(&base, &self.chain_files, self.merge_mode);
        Ok(GraphView { graph, entry_points, merge })
    }

    /// Graph statistics in the report's table shape. Sink counts need
    /// the vulnerability database and the present-library set.
    pub fn stats(
        &self,
        vulndb: Option<&formats::VulnDbDocument>,
        present: &BTreeSet<Coordinate>,
        with_passes: bool,
    ) -> Result<formats::GraphStats> {
        let static_view = self.view(GraphMode::StaticOnly)?;
        let mut stats = formats::GraphStats {
            static_vertices: static_view.graph.vertex_count(),
            static_edges: static_view.graph.edge_count(),
            dynamic_vertices: 0,
            dynamic_edges: 0,
            static_sinks: None,
            dynamic_sinks: None,
            passes: with_passes.then_some(self.static_build.diagnostics),
            merge: None,
        };
        if let Some(dynamic) = &self.dynamic {
            stats.dynamic_vertices = dynamic.graph.vertex_count();
            stats.dynamic_edges = dynamic.graph.edge_count();
        }
        if let Some(vulndb) = vulndb {
            let count = |view: &GraphView| {
                compose::reachable_sinks(&view.graph, vulndb, present, &view.entry_points)
                    .iter()
                    .filter(|f| f.reachable())
                    .count()
            };
            stats.static_sinks = Some(count(&static_view));
            let combined_view = self.view(GraphMode::Combined)?;
            stats.dynamic_sinks = Some(count(&combined_view));
        }
        Ok(stats)
    }
}

/// Writes to a file when a path is given, otherwise to stdout.
pub fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
