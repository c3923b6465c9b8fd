//! Precomputation of vulnerable-method call chains for one library
//! version in isolation: simple paths from the library's public surface
//! to each vulnerability-specific sink.
//!
//! Chains are computed without any application context, which is what
//! makes the overall analysis modular: libraries are analyzed once and
//! their chain files merged into any number of application graphs.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formats::{ChainFile, ProgramDocument, Visibility};
use crate::model::{CallChain, CallGraph, Coordinate, MethodRef, Origin, OriginMap};
use crate::static_cg::{self, BuildError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("expected a library document, found the application")]
    NotALibrary,
    #[error("chain limits must be at least 1")]
    InvalidLimits,
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Enumeration bounds. Path enumeration is exponential in the worst
/// case, so both the chain length and the number of chains per sink are
/// capped; hitting the cap is flagged, never silent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainLimits {
    pub max_length: usize,
    pub max_chains_per_sink: usize,
}

impl ChainLimits {
    pub const DEFAULT_MAX_LENGTH: usize = 16;
    pub const DEFAULT_MAX_CHAINS_PER_SINK: usize = 1000;

    pub fn new(max_length: usize, max_chains_per_sink: usize) -> Result<Self, ChainError> {
        if max_length == 0 || max_chains_per_sink == 0 {
            return Err(ChainError::InvalidLimits);
        }
        Ok(ChainLimits { max_length, max_chains_per_sink })
    }
}

impl Default for ChainLimits {
    fn default() -> Self {
        ChainLimits {
            max_length: Self::DEFAULT_MAX_LENGTH,
            max_chains_per_sink: Self::DEFAULT_MAX_CHAINS_PER_SINK,
        }
    }
}

/// The externally callable surface of a library: its public methods.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LibrarySurface {
    pub entry_points: BTreeSet<MethodRef>,
}

impl LibrarySurface {
    /// Every public method of the library document.
    pub fn public_methods(library: &ProgramDocument) -> Self {
        let entry_points = library
            .methods()
            .filter(|(_, m)| m.visibility == Visibility::Public)
            .map(|(c, m)| m.ref_in(&c.name))
            .collect();
        LibrarySurface { entry_points }
    }
}

/// The intra-library static graph: init edges plus CHA over the
/// library's own classes. No RTA — analyzed in isolation there is no
/// usage context to seed it, and pruning would risk false negatives.
pub fn library_graph(library: &ProgramDocument) -> Result<CallGraph, ChainError> {
    let coordinate = library.coordinate().ok_or(ChainError::NotALibrary)?;
    // Everything inside a library document is third-party code of that
    // library; the empty prefix matches all class names.
    let mut map = OriginMap::default();
    map.push_rule("", Origin::ThirdParty(coordinate.clone()));
    Ok(static_cg::cha_graph(library, &map)?)
}

/// Per-run notes: sinks absent from the graph entirely (possibly
/// belonging to another version), sinks present but unreachable from
/// the surface, and sinks whose enumeration hit the cap.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainDiagnostics {
    pub missing_sinks: Vec<MethodRef>,
    pub unreachable_sinks: Vec<MethodRef>,
    pub truncated_sinks: Vec<MethodRef>,
}

/// Enumerates, for every sink, the simple paths from each surface entry
/// point to that sink, bounded by `limits`. Chains come out in a
/// deterministic order: sinks in canonical order, then paths in
/// lexicographic order of their vertex sequences. A sink that is itself
/// public yields no self-chain; a direct external call to it is caught
/// at merge time because the sink then already sits in the application
/// graph.
pub fn enumerate_chains(
    graph: &CallGraph,
    surface: &LibrarySurface,
    sinks: &[MethodRef],
    limits: ChainLimits,
    library: &Coordinate,
) -> (ChainFile, ChainDiagnostics) {
    let mut diagnostics = ChainDiagnostics::default();
    let mut chains = Vec::new();

    let mut sorted_sinks: Vec<&MethodRef> = sinks.iter().collect();
    sorted_sinks.sort();
    sorted_sinks.dedup();

    for sink in sorted_sinks {
        if !graph.contains_vertex(sink) {
            diagnostics.missing_sinks.push(sink.clone());
            continue;
        }
        let mut paths: Vec<Vec<MethodRef>> = Vec::new();
        let mut truncated = false;
        let mut entries: Vec<&MethodRef> = surface.entry_points.iter().collect();
        entries.sort_by_key(|m| m.canonical());
        for entry in entries {
            if *entry == *sink || !graph.contains_vertex(entry) {
                continue;
            }
            let mut path = vec![entry.clone()];
            let mut visited = BTreeSet::from([entry.clone()]);
            dfs(graph, sink, limits, &mut path, &mut visited, &mut paths, &mut truncated);
            if truncated {
                break;
            }
        }
        if paths.is_empty() {
            diagnostics.unreachable_sinks.push(sink.clone());
        }
        if truncated {
            diagnostics.truncated_sinks.push(sink.clone());
        }
        paths.sort_by(|a, b| {
            let ka: Vec<String> = a.iter().map(MethodRef::canonical).collect();
            let kb: Vec<String> = b.iter().map(MethodRef::canonical).collect();
            ka.cmp(&kb)
        });
        for path in paths {
            let edges = path.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
            chains.push(CallChain::new(edges, sink.clone(), library.clone()));
        }
    }

    let file = ChainFile {
        library: library.clone(),
        chains,
        truncated_sinks: diagnostics.truncated_sinks.clone(),
    };
    (file, diagnostics)
}

/// Depth-first simple-path search. Neighbors are visited in canonical
/// order, so paths are produced lexicographically; exploration beyond
/// the sink is pointless for a simple path and is cut off.
fn dfs(
    graph: &CallGraph,
    sink: &MethodRef,
    limits: ChainLimits,
    path: &mut Vec<MethodRef>,
    visited: &mut BTreeSet<MethodRef>,
    found: &mut Vec<Vec<MethodRef>>,
    truncated: &mut bool,
) {
    if *truncated {
        return;
    }
    let current = path.last().expect("path never empty").clone();
    if current == *sink {
        if found.len() >= limits.max_chains_per_sink {
            *truncated = true;
        } else {
            found.push(path.clone());
        }
        return;
    }
    if path.len() > limits.max_length {
        return; // edge budget exhausted
    }
    let mut next: Vec<&MethodRef> = graph.successors(&current).into_iter().collect();
    next.sort_by_key(|m| m.canonical());
    for callee in next {
        if visited.contains(callee) {
            continue;
        }
        path.push(callee.clone());
        visited.insert(callee.clone());
        dfs(graph, sink, limits, path, visited, found, truncated);
        visited.remove(callee);
        path.pop();
        if *truncated {
            return;
        }
    }
}
