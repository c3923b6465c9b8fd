//! Interchange documents: program IR, dynamic traces, registry
//! snapshots, manifests, lockfiles, the vulnerability database, chain
//! files, saved graphs, and findings reports.
//!
//! Everything is JSON (traces are one JSON object per line). Exact
//! field names are frozen in `docs/formats.md`. Loaders never panic on
//! arbitrary bytes; every failure is a structured [`FormatError`] that
//! names the offending document node.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compose::Finding;
use crate::depres::{CompareMetrics, Constraint, ResolutionResult};
use crate::model::{
    CallChain, CallGraph, Coordinate, Descriptor, EntryPointSet, MethodRef, Origin, OriginMap,
    PackageId, Provenance, Version,
};
use crate::remediate::BreakingReport;
use crate::static_cg::StaticDiagnostics;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document is not UTF-8")]
    NotUtf8,
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> FormatError {
    FormatError::Invalid { path: path.into(), reason: reason.into() }
}

// ---------------------------------------------------------------------------
// Program IR
// ---------------------------------------------------------------------------

/// Whether a program document is the application under analysis or one
/// library version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocumentOrigin {
    Application,
    Library(Coordinate),
}

/// The IR for one application or one library version: class hierarchy,
/// methods, call sites, instantiations, and body digests.
///
/// Superclass/interface names may dangle; such external types are
/// treated as opaque leaves with no members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramDocument {
    pub origin: DocumentOrigin,
    pub classes: Vec<ClassModel>,
}

impl ProgramDocument {
    pub fn is_application(&self) -> bool {
        matches!(self.origin, DocumentOrigin::Application)
    }

    pub fn coordinate(&self) -> Option<&Coordinate> {
        match &self.origin {
            DocumentOrigin::Application => None,
            DocumentOrigin::Library(c) => Some(c),
        }
    }

    pub fn class(&self, name: &str) -> Option<&ClassModel> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Every (owning class, method) pair in document order.
    pub fn methods(&self) -> impl Iterator<Item = (&ClassModel, &MethodModel)> {
        self.classes.iter().flat_map(|c| c.methods.iter().map(move |m| (c, m)))
    }

    fn validate(&self) -> Result<(), FormatError> {
        let mut class_names = BTreeSet::new();
        for (ci, class) in self.classes.iter().enumerate() {
            let cpath = format!("classes[{ci}]");
            if class.name.is_empty() {
                return Err(invalid(cpath, "empty class name"));
            }
            if !class_names.insert(class.name.clone()) {
                return Err(invalid(cpath, format!("duplicate class `{}`", class.name)));
            }
            let mut signatures = BTreeSet::new();
            for (mi, method) in class.methods.iter().enumerate() {
                let mpath = format!("{cpath}.methods[{mi}]");
                if method.name.is_empty() {
                    return Err(invalid(mpath, "empty method name"));
                }
                if !signatures.insert((method.name.clone(), method.descriptor.clone())) {
                    return Err(invalid(
                        mpath,
                        format!("duplicate method `{}{}` in `{}`", method.name, method.descriptor, class.name),
                    ));
                }
                for (si, site) in method.call_sites.iter().enumerate() {
                    let spath = format!("{mpath}.calls[{si}]");
                    match site {
                        CallSite::Direct { target } => {
                            if target.class_name.is_empty() {
                                return Err(invalid(spath, "direct call target has empty class"));
                            }
                        }
                        CallSite::Virtual { receiver, name, .. } => {
                            if receiver.is_empty() {
                                return Err(invalid(spath, "virtual call has empty receiver type"));
                            }
                            if name.is_empty() {
                                return Err(invalid(spath, "virtual call has empty method name"));
                            }
                        }
                        CallSite::Reflective { .. } => {}
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassModel {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superclass: Option<String>,
    #[serde(default)]
    pub interfaces: Vec<String>,
    #[serde(rename = "abstract", default)]
    pub is_abstract: bool,
    #[serde(default)]
    pub methods: Vec<MethodModel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodModel {
    pub name: String,
    pub descriptor: Descriptor,
    pub visibility: Visibility,
    #[serde(rename = "static", default)]
    pub is_static: bool,
    pub body_digest: String,
    #[serde(default)]
    pub instantiates: Vec<String>,
    #[serde(rename = "calls", default)]
    pub call_sites: Vec<CallSite>,
}

impl MethodModel {
    /// The full reference of this method given its owning class.
    pub fn ref_in(&self, class_name: &str) -> MethodRef {
        MethodRef::new(class_name, self.name.clone(), self.descriptor.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Visibility {
    Public,
    Protected,
    Package,
    Private,
}

/// One call site inside a method body. `direct` covers static and
/// other non-virtual calls with a known target; `virtual` dispatches on
/// the declared receiver type; `reflective` carries whatever constant
/// arguments the IR producer could recover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CallSite {
    Direct {
        target: MethodRef,
    },
    Virtual {
        receiver: String,
        name: String,
        descriptor: Descriptor,
    },
    Reflective {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        class: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        method: Option<String>,
    },
}

pub fn load_program(bytes: &[u8]) -> Result<ProgramDocument, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::NotUtf8)?;
    let doc: ProgramDocument = serde_json::from_str(text)?;
    doc.validate()?;
    Ok(doc)
}

pub fn save_program(doc: &ProgramDocument) -> String {
    to_pretty(doc)
}

// ---------------------------------------------------------------------------
// Dynamic traces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub caller: MethodRef,
    pub callee: MethodRef,
}

/// An ordered list of observed call events. Duplicates are permitted
/// here and deduplicated when the graph is built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceDocument {
    pub events: Vec<TraceEvent>,
}

/// Parses `trace.jsonl`: one `{"caller": ..., "callee": ...}` object
/// per line. Blank lines are skipped; anything else malformed reports
/// its line number.
pub fn load_trace(bytes: &[u8]) -> Result<TraceDocument, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::NotUtf8)?;
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let event: TraceEvent = serde_json::from_str(line)
            .map_err(|e| FormatError::Line { line: i + 1, reason: e.to_string() })?;
        events.push(event);
    }
    Ok(TraceDocument { events })
}

pub fn save_trace(trace: &TraceDocument) -> String {
    let mut out = String::new();
    for event in &trace.events {
        out.push_str(&serde_json::to_string(event).expect("trace event serializes"));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Registry, manifest, lockfile
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyDecl {
    pub package: PackageId,
    pub constraint: Constraint,
}

/// A point-in-time snapshot of the package universe: every known
/// version of every package with its dependency list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryDocument {
    pub packages: BTreeMap<PackageId, BTreeMap<Version, Vec<DependencyDecl>>>,
}

pub fn load_registry(bytes: &[u8]) -> Result<RegistryDocument, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::NotUtf8)?;
    let doc: RegistryDocument = serde_json::from_str(text)?;
    for (package, versions) in &doc.packages {
        for (version, deps) in versions {
            for dep in deps {
                if dep.package == *package && dep.constraint.satisfies(version) {
                    return Err(invalid(
                        format!("packages[\"{package}\"][\"{version}\"]"),
                        "self-dependency at the same coordinate",
                    ));
                }
            }
        }
    }
    Ok(doc)
}

pub fn save_registry(doc: &RegistryDocument) -> String {
    to_pretty(doc)
}

/// Declared direct dependencies in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestDocument {
    pub dependencies: Vec<DependencyDecl>,
}

pub fn load_manifest(bytes: &[u8]) -> Result<ManifestDocument, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::NotUtf8)?;
    let doc: ManifestDocument = serde_json::from_str(text)?;
    let mut seen = BTreeSet::new();
    for (i, dep) in doc.dependencies.iter().enumerate() {
        if !seen.insert(dep.package.clone()) {
            return Err(invalid(
                format!("dependencies[{i}]"),
                format!("duplicate package `{}`", dep.package),
            ));
        }
    }
    Ok(doc)
}

pub fn save_manifest(doc: &ManifestDocument) -> String {
    to_pretty(doc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockEntry {
    pub coordinate: Coordinate,
    #[serde(default)]
    pub parent: Option<Coordinate>,
}

/// An exact resolved coordinate list recorded at a point in time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockfileDocument {
    pub packages: Vec<LockEntry>,
}

pub fn load_lockfile(bytes: &[u8]) -> Result<LockfileDocument, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::NotUtf8)?;
    Ok(serde_json::from_str(text)?)
}

pub fn save_lockfile(doc: &LockfileDocument) -> String {
    to_pretty(doc)
}

// ---------------------------------------------------------------------------
// Vulnerability database
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnRecord {
    pub id: String,
    pub package: PackageId,
    pub range: Constraint,
    pub sinks: Vec<MethodRef>,
}

/// Hand-curated, vulnerability-specific sinks: the method-level root
/// causes, keyed by package and affected version range.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnDbDocument {
    pub vulnerabilities: Vec<VulnRecord>,
}

impl VulnDbDocument {
    /// Sinks applying to one concrete library version.
    pub fn sinks_for(&self, coordinate: &Coordinate) -> Vec<MethodRef> {
        let mut sinks: Vec<MethodRef> = self
            .vulnerabilities
            .iter()
            .filter(|r| {
                r.package.group == coordinate.group
                    && r.package.artifact == coordinate.artifact
                    && r.range.satisfies(&coordinate.version)
            })
            .flat_map(|r| r.sinks.iter().cloned())
            .collect();
        sinks.sort();
        sinks.dedup();
        sinks
    }
}

pub fn load_vulndb(bytes: &[u8]) -> Result<VulnDbDocument, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::NotUtf8)?;
    let doc: VulnDbDocument = serde_json::from_str(text)?;
    let mut ids = BTreeSet::new();
    for (i, record) in doc.vulnerabilities.iter().enumerate() {
        let path = format!("vulnerabilities[{i}]");
        if !ids.insert(record.id.clone()) {
            return Err(invalid(path, format!("duplicate vulnerability id `{}`", record.id)));
        }
        if record.sinks.is_empty() {
            return Err(invalid(path, format!("`{}` has an empty sink list", record.id)));
        }
    }
    Ok(doc)
}

pub fn save_vulndb(doc: &VulnDbDocument) -> String {
    to_pretty(doc)
}

// ---------------------------------------------------------------------------
// Chain files
// ---------------------------------------------------------------------------

/// Precomputed vulnerable-method call chains for one library version.
/// `truncated_sinks` lists sinks whose enumeration hit the configured
/// per-sink cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainFile {
    pub library: Coordinate,
    pub chains: Vec<CallChain>,
    pub truncated_sinks: Vec<MethodRef>,
}

#[derive(Serialize, Deserialize)]
struct ChainRepr {
    edges: Vec<ChainEdgeRepr>,
    sink: MethodRef,
}

#[derive(Serialize, Deserialize)]
struct ChainEdgeRepr {
    caller: MethodRef,
    callee: MethodRef,
}

#[derive(Serialize, Deserialize)]
struct ChainFileRepr {
    library: Coordinate,
    chains: Vec<ChainRepr>,
    #[serde(default)]
    truncated_sinks: Vec<MethodRef>,
}

pub fn load_chains(bytes: &[u8]) -> Result<ChainFile, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::NotUtf8)?;
    let repr: ChainFileRepr = serde_json::from_str(text)?;
    let mut chains = Vec::new();
    for (i, chain) in repr.chains.into_iter().enumerate() {
        let chain = CallChain::new(
            chain.edges.into_iter().map(|e| (e.caller, e.callee)).collect(),
            chain.sink,
            repr.library.clone(),
        );
        chain
            .validate()
            .map_err(|e| invalid(format!("chains[{i}]"), e.to_string()))?;
        chains.push(chain);
    }
    Ok(ChainFile { library: repr.library, chains, truncated_sinks: repr.truncated_sinks })
}

pub fn save_chains(file: &ChainFile) -> Result<String, FormatError> {
    for (i, chain) in file.chains.iter().enumerate() {
        chain
            .validate()
            .map_err(|e| invalid(format!("chains[{i}]"), e.to_string()))?;
        if chain.library != file.library {
            return Err(invalid(
                format!("chains[{i}]"),
                format!("chain library {} differs from file library {}", chain.library, file.library),
            ));
        }
    }
    let repr = ChainFileRepr {
        library: file.library.clone(),
        chains: file
            .chains
            .iter()
            .map(|c| ChainRepr {
                edges: c
                    .edges
                    .iter()
                    .map(|(caller, callee)| ChainEdgeRepr { caller: caller.clone(), callee: callee.clone() })
                    .collect(),
                sink: c.sink.clone(),
            })
            .collect(),
        truncated_sinks: file.truncated_sinks.clone(),
    };
    Ok(to_pretty(&repr))
}

// ---------------------------------------------------------------------------
// Saved graphs
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphVertexRepr {
    #[serde(rename = "ref")]
    method: MethodRef,
    origin: Origin,
}

#[derive(Serialize, Deserialize)]
struct GraphEdgeRepr {
    caller: MethodRef,
    callee: MethodRef,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    vertices: Vec<GraphVertexRepr>,
    edges: Vec<GraphEdgeRepr>,
    entry_points: Vec<MethodRef>,
}

/// Serializes a graph together with the entry points that root it, so a
/// saved application graph can be fed back into the upgrade check.
pub fn save_graph(graph: &CallGraph, entry_points: &EntryPointSet) -> String {
    let repr = GraphRepr {
        vertices: graph
            .vertices()
            .map(|(m, o)| GraphVertexRepr { method: m.clone(), origin: o.clone() })
            .collect(),
        edges: graph
            .edges()
            .map(|e| GraphEdgeRepr { caller: e.caller, callee: e.callee, provenance: e.provenance })
            .collect(),
        entry_points: entry_points.iter().cloned().collect(),
    };
    to_pretty(&repr)
}

pub fn load_graph(bytes: &[u8]) -> Result<(CallGraph, EntryPointSet), FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::NotUtf8)?;
    let repr: GraphRepr = serde_json::from_str(text)?;
    let mut graph = CallGraph::new();
    for v in repr.vertices {
        graph.add_vertex(v.method, v.origin);
    }
    for (i, e) in repr.edges.into_iter().enumerate() {
        if !graph.contains_vertex(&e.caller) || !graph.contains_vertex(&e.callee) {
            return Err(invalid(format!("edges[{i}]"), "edge endpoint is not a vertex"));
        }
        graph.add_edge(e.caller, e.callee, e.provenance);
    }
    for (i, m) in repr.entry_points.iter().enumerate() {
        if !graph.contains_vertex(m) {
            return Err(invalid(format!("entry_points[{i}]"), format!("`{m}` is not a vertex")));
        }
    }
    Ok((graph, repr.entry_points.into_iter().collect()))
}

/// Loads an `OriginMap` rule file (`origins.json`).
pub fn load_origins(bytes: &[u8]) -> Result<OriginMap, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::NotUtf8)?;
    Ok(serde_json::from_str(text)?)
}

// ---------------------------------------------------------------------------
// Findings report
// ---------------------------------------------------------------------------

/// Graph size and sink counts in the shape used by the evaluation
/// tables, plus per-pass diagnostics from the static build.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub static_vertices: usize,
    pub static_edges: usize,
    pub dynamic_vertices: usize,
    pub dynamic_edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub static_sinks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamic_sinks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passes: Option<StaticDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge: Option<crate::compose::MergeDiagnostics>,
}

/// The user-facing output: reachability findings plus optional
/// resolution, comparison, and breaking-change sections.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FindingsReport {
    pub findings: Vec<Finding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<ResolutionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<CompareMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breaking: Option<BreakingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_stats: Option<GraphStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Machine,
    Human,
}

/// Renders a report. The machine format is deterministic JSON: struct
/// field order is fixed and every list is sorted by its producer. The
/// human format is markdown grouped by vulnerability.
pub fn emit_report(report: &FindingsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Machine => to_pretty(report),
        ReportFormat::Human => render_markdown(report),
    }
}

fn render_markdown(report: &FindingsReport) -> String {
    use std::fmt::Write as _;

    let mut out = String::from("# Composition Analysis Report\n");

    out.push_str("\n## Findings\n");
    if report.findings.is_empty() {
        out.push_str("\nNo vulnerabilities evaluated.\n");
    }
    let mut by_vuln: BTreeMap<&str, Vec<&Finding>> = BTreeMap::new();
    for finding in &report.findings {
        by_vuln.entry(&finding.vuln_id).or_default().push(finding);
    }
    for (vuln_id, findings) in by_vuln {
        let _ = writeln!(out, "\n### {vuln_id}");
        for finding in findings {
            let status = if finding.reachable() { "reachable" } else { "not reachable" };
            let _ = writeln!(out, "- sink `{}`: **{status}**", finding.sink);
            if let Some(provenance) = &finding.provenance {
                let _ = writeln!(out, "  - provenance: {provenance}");
            }
            if let Some(witness) = &finding.witness {
                let path: Vec<String> = witness.iter().map(|m| format!("`{m}`")).collect();
                let _ = writeln!(out, "  - witness: {}", path.join(" -> "));
            }
        }
    }

    if let Some(resolution) = &report.resolution {
        let _ = writeln!(out, "\n## Resolution ({})", resolution.mode);
        let _ = writeln!(out, "\n{} coordinates:", resolution.coordinates.len());
        for coordinate in &resolution.coordinates {
            let _ = writeln!(out, "- `{coordinate}`");
        }
        let d = &resolution.diagnostics;
        for note in d.conflicts_mediated.iter().chain(&d.constraints_unsatisfied).chain(&d.entries_skipped) {
            let _ = writeln!(out, "- note: {note}");
        }
    }

    if let Some(cmp) = &report.comparison {
        let _ = writeln!(out, "\n## Resolution comparison ({} vs {})", cmp.baseline_mode, cmp.other_mode);
        let _ = writeln!(out, "- baseline: {} coordinates", cmp.baseline_count);
        let _ = writeln!(out, "- other: {} coordinates", cmp.other_count);
        match cmp.percent_change {
            Some(pct) => {
                let _ = writeln!(out, "- change: {pct:+.1}%");
            }
            None => {
                let _ = writeln!(out, "- change: undefined (empty baseline)");
            }
        }
    }

    if let Some(breaking) = &report.breaking {
        let _ = writeln!(out, "\n## Upgrade advisory: {} -> {}", breaking.from, breaking.to);
        let _ = writeln!(out, "\nVerdict: **{}** ({} graph)", breaking.verdict, breaking.mode);
        for risky in &breaking.risky {
            let _ = writeln!(out, "- `{}` is changed by this upgrade and used by the application", risky.method);
            if !risky.witness.is_empty() {
                let path: Vec<String> = risky.witness.iter().map(|m| format!("`{m}`")).collect();
                let _ = writeln!(out, "  - used via: {}", path.join(" -> "));
            }
        }
    }

    if let Some(stats) = &report.graph_stats {
        out.push_str("\n## Graph statistics\n\n");
        let _ = writeln!(out, "| metric | value |");
        let _ = writeln!(out, "|---|---|");
        let _ = writeln!(out, "| static vertices | {} |", stats.static_vertices);
        let _ = writeln!(out, "| static edges | {} |", stats.static_edges);
        let _ = writeln!(out, "| dynamic vertices | {} |", stats.dynamic_vertices);
        let _ = writeln!(out, "| dynamic edges | {} |", stats.dynamic_edges);
        if let Some(n) = stats.static_sinks {
            let _ = writeln!(out, "| static sinks | {n} |");
        }
        if let Some(n) = stats.dynamic_sinks {
            let _ = writeln!(out, "| dynamic sinks | {n} |");
        }
    }

    out
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("document serializes");
    text.push('\n');
    text
}
