//! Dynamic call graphs from recorded execution traces.
//!
//! A trace is ingested into a graph of dynamic edges, framework entry
//! points (framework caller, first-party callee) are identified, and
//! the first-party-rooted subgraph is projected out. The projection is
//! what makes dynamic data composable with the static graph: its roots
//! are first-party, so the membership-equals-reachability property of
//! the merged graph survives the union.

use std::collections::BTreeSet;

use crate::formats::TraceDocument;
use crate::model::{CallGraph, EntryPointSet, MethodRef, Origin, OriginMap, Provenance};

/// A trace edge that crosses from framework code into application
/// code: the inversion-of-control point where a framework invokes a
/// first-party method.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FrameworkEntry {
    pub caller: MethodRef,
    pub callee: MethodRef,
}

/// Builds the dynamic graph from trace events: one dynamic-provenance
/// edge per distinct (caller, callee) pair, vertices classified by the
/// origin map. Event order and duplicates carry no meaning here.
pub fn ingest_trace(trace: &TraceDocument, map: &OriginMap) -> CallGraph {
    let mut graph = CallGraph::new();
    for event in &trace.events {
        graph.add_edge_with(
            (event.caller.clone(), map.classify(&event.caller)),
            (event.callee.clone(), map.classify(&event.callee)),
            Provenance::Dynamic,
        );
    }
    graph
}

/// All edges whose caller is framework code and whose callee is
/// first-party, in deterministic order.
pub fn framework_entries(graph: &CallGraph) -> Vec<FrameworkEntry> {
    let mut entries = Vec::new();
    for edge in graph.edges() {
        let caller_framework = graph.origin_of(&edge.caller).is_some_and(Origin::is_framework);
        let callee_first_party = graph.origin_of(&edge.callee).is_some_and(Origin::is_first_party);
        if caller_framework && callee_first_party {
            entries.push(FrameworkEntry { caller: edge.caller, callee: edge.callee });
        }
    }
    entries.sort();
    entries.dedup();
    entries
}

/// Projects the first-party-rooted subgraph: every vertex and edge
/// traversed from the entry callees. The framework callers themselves
/// are excluded, and traversal does not continue through framework
/// vertices, so framework-internal edges never enter the projection.
pub fn project(graph: &CallGraph, entries: &[FrameworkEntry]) -> CallGraph {
    let roots: BTreeSet<MethodRef> = entries.iter().map(|e| e.callee.clone()).collect();
    project_from_roots(graph, &roots)
}

/// Same traversal with explicit roots; used when the roots are already
/// first-party methods rather than framework entries.
pub fn project_from_roots(graph: &CallGraph, roots: &BTreeSet<MethodRef>) -> CallGraph {
    let mut projected = CallGraph::new();
    let mut queue: Vec<MethodRef> = Vec::new();
    for root in roots {
        if let Some(origin) = graph.origin_of(root) {
            projected.add_vertex(root.clone(), origin.clone());
            queue.push(root.clone());
        }
    }
    let mut visited: BTreeSet<MethodRef> = queue.iter().cloned().collect();
    while let Some(current) = queue.pop() {
        if graph.origin_of(&current).is_some_and(Origin::is_framework) {
            continue; // do not walk framework internals
        }
        for (callee, provenance) in graph.out_edges(&current) {
            projected.add_vertex(callee.clone(), graph.origin_of(callee).expect("endpoint").clone());
            projected.add_edge(current.clone(), callee.clone(), *provenance);
            if visited.insert(callee.clone()) {
                queue.push(callee.clone());
            }
        }
    }
    projected
}

/// The full dynamic pipeline over one or more traces: union of the
/// ingested graphs, framework entries, and the projection, together
/// with the first-party roots the projection grew from.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicBuild {
    /// The raw dynamic graph over all traces.
    pub full: CallGraph,
    /// The first-party-rooted projection.
    pub graph: CallGraph,
    pub entries: Vec<FrameworkEntry>,
    pub roots: EntryPointSet,
}

pub fn build_dynamic(traces: &[TraceDocument], map: &OriginMap) -> DynamicBuild {
    let mut full = CallGraph::new();
    for trace in traces {
        full.absorb(&ingest_trace(trace, map));
    }
    let entries = framework_entries(&full);
    let graph = project(&full, &entries);
    let roots: EntryPointSet = entries.iter().map(|e| e.callee.clone()).collect();
    DynamicBuild { full, graph, entries, roots }
}
