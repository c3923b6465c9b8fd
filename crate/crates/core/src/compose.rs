//! Composition: merging precomputed library chains into a graph,
//! unioning static and dynamic graphs, and answering sink reachability.
//!
//! The merge never introduces third-party entry points: a chain suffix
//! is attached only from a vertex already in the graph, and every
//! vertex the suffix adds receives an incoming edge. That preserves the
//! pipeline invariant that all vertices are reachable from a
//! first-party entry point, which reduces the question "is this sink
//! reachable?" to a vertex membership check.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::formats::{ChainFile, VulnDbDocument};
use crate::model::{
    CallChain, CallGraph, Coordinate, EntryPointSet, MethodRef, Origin, Provenance,
};

/// How repeated chain merging is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergeMode {
    /// One deterministic left-fold in file order, then chain order.
    #[default]
    Fold,
    /// Re-run the fold until the graph stops changing, so a chain may
    /// anchor on vertices added by a later chain. Extra merges relative
    /// to the single fold are surfaced in diagnostics.
    Fixpoint,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MergeDiagnostics {
    pub chains_merged: usize,
    pub chains_skipped: usize,
    pub passes: usize,
    /// Chains that only anchored on a second or later fixpoint pass.
    pub fixpoint_extra: usize,
}

/// Merges one chain: scan its edges for the first caller already
/// present in the graph and splice in the suffix from that edge on,
/// with chain provenance; vertices the suffix introduces are
/// third-party methods of the chain's library. A chain with no caller
/// in the graph leaves it unchanged.
pub fn merge_chain(graph: &CallGraph, chain: &CallChain) -> CallGraph {
    let mut merged = graph.clone();
    merge_chain_mut(&mut merged, chain);
    merged
}

/// In-place variant; true when an anchor was found.
fn merge_chain_mut(graph: &mut CallGraph, chain: &CallChain) -> bool {
    let anchor = chain.edges.iter().position(|(caller, _)| graph.contains_vertex(caller));
    let Some(anchor) = anchor else {
        return false;
    };
    let library_origin = Origin::ThirdParty(chain.library.clone());
    for (caller, callee) in &chain.edges[anchor..] {
        graph.add_edge_with(
            (caller.clone(), library_origin.clone()),
            (callee.clone(), library_origin.clone()),
            Provenance::Chain,
        );
    }
    true
}

/// Left-fold of [`merge_chain`] over chain files, in file order then
/// chain order. In fixpoint mode the fold repeats until stable.
pub fn merge_chains(
    graph: &CallGraph,
    files: &[ChainFile],
    mode: MergeMode,
) -> (CallGraph, MergeDiagnostics) {
    let mut merged = graph.clone();
    let mut diagnostics = MergeDiagnostics::default();

    let mut done: BTreeSet<usize> = BTreeSet::new();
    let chains: Vec<&CallChain> = files.iter().flat_map(|f| f.chains.iter()).collect();
    loop {
        diagnostics.passes += 1;
        let mut changed = false;
        for (i, chain) in chains.iter().enumerate() {
            if done.contains(&i) {
                continue;
            }
            if merge_chain_mut(&mut merged, chain) {
                done.insert(i);
                diagnostics.chains_merged += 1;
                if diagnostics.passes > 1 {
                    diagnostics.fixpoint_extra += 1;
                }
                changed = true;
            }
        }
        if mode == MergeMode::Fold || !changed {
            break;
        }
    }
    diagnostics.chains_skipped = chains.len() - done.len();
    (merged, diagnostics)
}

/// Vertex and edge set union. Provenance is preserved per edge, so an
/// edge found both statically and dynamically carries both tags. On
/// conflicting vertex origins the left graph wins.
pub fn union(left: &CallGraph, right: &CallGraph) -> CallGraph {
    let mut combined = left.clone();
    combined.absorb(right);
    combined
}

/// How the witness path for a finding was discovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingProvenance {
    Static,
    Dynamic,
    Both,
}

impl std::fmt::Display for FindingProvenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FindingProvenance::Static => "static",
            FindingProvenance::Dynamic => "dynamic",
            FindingProvenance::Both => "both",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingStatus {
    Reachable,
    NotReachable,
}

/// The reachability verdict for one (vulnerability, sink) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub vuln_id: String,
    pub sink: MethodRef,
    pub status: FindingStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<FindingProvenance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<MethodRef>>,
}

impl Finding {
    pub fn reachable(&self) -> bool {
        self.status == FindingStatus::Reachable
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("sink {0} is not a vertex of the graph")]
    SinkAbsent(MethodRef),
    #[error("sink {0} is not reachable from any entry point")]
    Unreachable(MethodRef),
}

/// Shortest path from some entry point to the sink, deterministic: of
/// all shortest paths, the lexicographically smallest by canonical
/// reference order. A sink that is itself an entry point yields the
/// single-vertex path.
pub fn witness(
    graph: &CallGraph,
    entry_points: &EntryPointSet,
    sink: &MethodRef,
) -> Result<Vec<MethodRef>, WitnessError> {
    if !graph.contains_vertex(sink) {
        return Err(WitnessError::SinkAbsent(sink.clone()));
    }
    // Distance-to-sink over reversed edges, then a forward greedy walk
    // that always picks the canonically smallest next hop one step
    // closer to the sink. Greedy over exact distances yields the
    // lexicographically smallest shortest path.
    let mut dist: BTreeMap<MethodRef, usize> = BTreeMap::from([(sink.clone(), 0)]);
    let mut frontier = vec![sink.clone()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for vertex in frontier {
            let d = dist[&vertex];
            for pred in graph.predecessors(&vertex) {
                if !dist.contains_key(pred) {
                    dist.insert(pred.clone(), d + 1);
                    next.push(pred.clone());
                }
            }
        }
        frontier = next;
    }

    let start = entry_points
        .iter()
        .filter(|m| dist.contains_key(*m))
        .min_by_key(|m| (dist[*m], m.canonical()))
        .ok_or_else(|| WitnessError::Unreachable(sink.clone()))?;

    let mut path = vec![start.clone()];
    let mut current = start.clone();
    while current != *sink {
        let remaining = dist[&current];
        let next = graph
            .successors(&current)
            .into_iter()
            .filter(|s| dist.get(*s).is_some_and(|d| d + 1 == remaining))
            .min_by_key(|s| s.canonical())
            .expect("distance table admits a next hop")
            .clone();
        path.push(next.clone());
        current = next;
    }
    Ok(path)
}

/// Classifies a witness path by the provenances of its edges. Chain
/// edges are statically derived and count as static; a path with no
/// edges (the sink is an entry point) is static by convention.
fn path_provenance(graph: &CallGraph, path: &[MethodRef]) -> FindingProvenance {
    let mut uses_static = false;
    let mut uses_dynamic = false;
    for pair in path.windows(2) {
        for provenance in graph.provenances(&pair[0], &pair[1]) {
            match provenance {
                Provenance::Static | Provenance::Chain => uses_static = true,
                Provenance::Dynamic => uses_dynamic = true,
            }
        }
    }
    match (uses_static, uses_dynamic) {
        (true, true) => FindingProvenance::Both,
        (false, true) => FindingProvenance::Dynamic,
        _ => FindingProvenance::Static,
    }
}

/// Evaluates every vulnerability record whose coordinate and version
/// range match a present library. Reachability is vertex membership in
/// the merged graph; reachable findings carry a witness path and its
/// provenance. Findings are sorted by (vulnerability, sink).
pub fn reachable_sinks(
    graph: &CallGraph,
    vulndb: &VulnDbDocument,
    present: &BTreeSet<Coordinate>,
    entry_points: &EntryPointSet,
) -> Vec<Finding> {
    let mut findings = Vec::new();
    for record in &vulndb.vulnerabilities {
        let applies = present.iter().any(|c| {
            c.group == record.package.group
                && c.artifact == record.package.artifact
                && record.range.satisfies(&c.version)
        });
        if !applies {
            continue;
        }
        let mut sinks = record.sinks.clone();
        sinks.sort();
        sinks.dedup();
        for sink in sinks {
            let reachable = graph.contains_vertex(&sink);
            let (provenance, witness_path) = if reachable {
                match witness(graph, entry_points, &sink) {
                    Ok(path) => (Some(path_provenance(graph, &path)), Some(path)),
                    Err(_) => (None, None),
                }
            } else {
                (None, None)
            };
            findings.push(Finding {
                vuln_id: record.id.clone(),
                sink,
                status: if reachable { FindingStatus::Reachable } else { FindingStatus::NotReachable },
                provenance,
                witness: witness_path,
            });
        }
    }
    findings.sort_by(|a, b| (&a.vuln_id, &a.sink).cmp(&(&b.vuln_id, &b.sink)));
    findings
}
