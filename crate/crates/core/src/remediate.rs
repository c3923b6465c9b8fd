//! Upgrade impact analysis: diff two versions of a library, close the
//! changed set over the caller relation (a method counts as changed if
//! a callee changed), and flag the upgrade when any member of that
//! closure appears in the application's call graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::compose;
use crate::formats::ProgramDocument;
use crate::model::{CallGraph, Coordinate, EntryPointSet, MethodRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("both documents must be library versions, found the application")]
    NotALibrary,
    #[error("cannot diff versions of different packages: {0} vs {1}")]
    PackageMismatch(Coordinate, Coordinate),
}

/// Raw presence/content diff between two versions of one library.
/// The three sets are pairwise disjoint by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VersionDiff {
    pub from: Coordinate,
    pub to: Coordinate,
    pub added: BTreeSet<MethodRef>,
    pub removed: BTreeSet<MethodRef>,
    pub body_changed: BTreeSet<MethodRef>,
}

/// Compares two library documents of the same (group, artifact).
/// A method present in both counts as body-changed when its body
/// digest or its call-site list differs.
pub fn diff_versions(v1: &ProgramDocument, v2: &ProgramDocument) -> Result<VersionDiff, DiffError> {
    let from = v1.coordinate().ok_or(DiffError::NotALibrary)?.clone();
    let to = v2.coordinate().ok_or(DiffError::NotALibrary)?.clone();
    if from.group != to.group || from.artifact != to.artifact {
        return Err(DiffError::PackageMismatch(from, to));
    }

    let index = |doc: &ProgramDocument| -> BTreeMap<MethodRef, (String, Vec<crate::formats::CallSite>)> {
        doc.methods()
            .map(|(c, m)| (m.ref_in(&c.name), (m.body_digest.clone(), m.call_sites.clone())))
            .collect()
    };
    let old = index(v1);
    let new = index(v2);

    let mut diff = VersionDiff {
        from,
        to,
        added: BTreeSet::new(),
        removed: BTreeSet::new(),
        body_changed: BTreeSet::new(),
    };
    for (method, fingerprint) in &old {
        match new.get(method) {
            None => {
                diff.removed.insert(method.clone());
            }
            Some(other) if other != fingerprint => {
                diff.body_changed.insert(method.clone());
            }
            Some(_) => {}
        }
    }
    for method in new.keys() {
        if !old.contains_key(method) {
            diff.added.insert(method.clone());
        }
    }
    Ok(diff)
}

/// Why a method landed in the changed closure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeReason {
    /// Removed or body-changed in the diff itself.
    Direct,
    /// Unchanged, but some call path reaches a changed method; the path
    /// runs from this method to the nearest changed one.
    ViaCallee(Vec<MethodRef>),
}

/// A version diff closed under "changed if a callee changed" over the
/// old version's call graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemanticDiff {
    pub base: VersionDiff,
    pub changed_closure: BTreeSet<MethodRef>,
    pub reasons: BTreeMap<MethodRef, ChangeReason>,
}

/// Least fixpoint of: m is changed if m was removed or body-changed, or
/// if some edge m -> c of the old version's library graph has c
/// changed. Added methods are not seeds: existing application code
/// cannot be calling them yet. Each closure member carries one shortest
/// via-callee path to a seed.
pub fn semantic_closure(diff: VersionDiff, v1_graph: &CallGraph) -> SemanticDiff {
    let seeds: BTreeSet<MethodRef> =
        diff.removed.union(&diff.body_changed).cloned().collect();

    // Reverse BFS from the seeds; dist[m] = shortest call-path length
    // from m to a seed.
    let mut dist: BTreeMap<MethodRef, usize> = seeds.iter().map(|m| (m.clone(), 0)).collect();
    let mut frontier: Vec<MethodRef> = seeds.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for m in frontier {
            let d = dist[&m];
            for pred in v1_graph.predecessors(&m) {
                if !dist.contains_key(pred) {
                    dist.insert(pred.clone(), d + 1);
                    next.push(pred.clone());
                }
            }
        }
        frontier = next;
    }

    let mut reasons = BTreeMap::new();
    for (method, distance) in &dist {
        if *distance == 0 {
            reasons.insert(method.clone(), ChangeReason::Direct);
            continue;
        }
        // Forward greedy walk along decreasing distance, canonically
        // smallest next hop first: the deterministic shortest path.
        let mut path = vec![method.clone()];
        let mut current = method.clone();
        while dist[&current] > 0 {
            let remaining = dist[&current];
            let next = v1_graph
                .successors(&current)
                .into_iter()
                .filter(|s| dist.get(*s).is_some_and(|d| d + 1 == remaining))
                .min_by_key(|s| s.canonical())
                .expect("distance table admits a next hop")
                .clone();
            path.push(next.clone());
            current = next;
        }
        reasons.insert(method.clone(), ChangeReason::ViaCallee(path));
    }

    SemanticDiff { base: diff, changed_closure: dist.into_keys().collect(), reasons }
}

/// Which application graph the breaking check ran against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphMode {
    StaticOnly,
    DynamicOnly,
    Combined,
}

impl std::fmt::Display for GraphMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GraphMode::StaticOnly => "static-only",
            GraphMode::DynamicOnly => "dynamic-only",
            GraphMode::Combined => "combined",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PotentiallyBreaking,
    NoObservedImpact,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::PotentiallyBreaking => "potentially-breaking",
            Verdict::NoObservedImpact => "no-observed-impact",
        };
        f.write_str(s)
    }
}

/// One changed method the application actually uses, with the call path
/// showing how.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RiskyUse {
    pub method: MethodRef,
    pub witness: Vec<MethodRef>,
}

/// The upgrade advisory: potentially breaking exactly when some member
/// of the changed closure occurs in the application graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreakingReport {
    pub from: Coordinate,
    pub to: Coordinate,
    pub mode: GraphMode,
    pub risky: Vec<RiskyUse>,
    pub verdict: Verdict,
}

/// Intersects the changed closure with the application graph's
/// vertices. `app` must be the graph matching `mode` (static-only,
/// dynamic-only, or combined), rooted at `entry_points`.
pub fn check_breaking(
    app: &CallGraph,
    entry_points: &EntryPointSet,
    sem: &SemanticDiff,
    mode: GraphMode,
) -> BreakingReport {
    let mut risky = Vec::new();
    for method in &sem.changed_closure {
        if !app.contains_vertex(method) {
            continue;
        }
        let witness = compose::witness(app, entry_points, method).unwrap_or_default();
        risky.push(RiskyUse { method: method.clone(), witness });
    }
    let verdict = if risky.is_empty() { Verdict::NoObservedImpact } else { Verdict::PotentiallyBreaking };
    BreakingReport {
        from: sem.base.from.clone(),
        to: sem.base.to.clone(),
        mode,
        risky,
        verdict,
    }
}
