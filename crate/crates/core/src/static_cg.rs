//! Static call graph construction for the application under analysis.
//!
//! The pipeline initializes edges from declared call targets, widens
//! virtual calls over the class hierarchy (CHA), narrows them back by
//! observed instantiations (RTA), adds constant-argument reflective
//! edges, computes first-party entry points, and prunes everything the
//! entry points cannot reach. Each pass is a pure function from graph
//! to graph, and later passes only refine earlier ones: CHA is a
//! superset of the initial edges, RTA is a subset of CHA, reflection
//! only adds.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::formats::{CallSite, ProgramDocument};
use crate::model::{CallGraph, Descriptor, EntryPointSet, MethodRef, Origin, OriginMap, Provenance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("inheritance cycle: {}", .0.join(" -> "))]
    InheritanceCycle(Vec<String>),
    #[error("no first-party entry points: every first-party method has a caller")]
    NoEntryPoints,
    #[error("{context}: call target has empty class name")]
    EmptyTargetClass { context: String },
    #[error("expected an application document, found a library")]
    NotAnApplication,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ClassInfo {
    is_abstract: bool,
    methods: BTreeSet<(String, Descriptor)>,
}

/// Subtype and supertype relations over one program document, with
/// method resolution along superclass chains. External (dangling)
/// supertype names are recorded as leaves with no members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyIndex {
    direct_subtypes: BTreeMap<String, BTreeSet<String>>,
    superclass: BTreeMap<String, Option<String>>,
    classes: BTreeMap<String, ClassInfo>,
}

/// Outcome of resolving a (class, signature) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    /// A declared method of the document.
    Declared(MethodRef),
    /// The walk left the document: the target lives in an external type.
    External(MethodRef),
    /// No declaration found and no external ancestor to blame.
    Missing,
}

impl HierarchyIndex {
    pub fn is_declared(&self, class: &str) -> bool {
        self.classes.contains_key(class)
    }

    pub fn is_concrete(&self, class: &str) -> bool {
        self.classes.get(class).is_some_and(|c| !c.is_abstract)
    }

    /// All transitive subtypes of `class` (via superclass and interface
    /// edges), excluding `class` itself. Only declared classes can be
    /// subtypes.
    pub fn subtypes_transitive(&self, class: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&str> = VecDeque::from([class]);
        while let Some(current) = queue.pop_front() {
            for sub in self.direct_subtypes.get(current).into_iter().flatten() {
                if seen.insert(sub.clone()) {
                    queue.push_back(sub);
                }
            }
        }
        seen
    }

    /// The superclass chain above `class`, nearest first, stopping at
    /// the first external name (included).
    pub fn supertypes(&self, class: &str) -> Vec<String> {
        let mut chain = Vec::new();
        let mut current = class.to_string();
        loop {
            match self.superclass.get(&current) {
                Some(Some(parent)) => {
                    chain.push(parent.clone());
                    if !self.is_declared(parent) {
                        break; // external: opaque from here up
                    }
                    current = parent.clone();
                }
                _ => break,
            }
        }
        chain
    }

    /// Resolves a method the way an invocation on static type `class`
    /// binds: own declaration first, else the nearest superclass
    /// declaration. A walk reaching an external type yields the target
    /// pinned at that external name.
    pub fn resolve(&self, class: &str, name: &str, descriptor: &Descriptor) -> Resolution {
        let mut current = class.to_string();
        loop {
            match self.classes.get(&current) {
                None => {
                    return Resolution::External(MethodRef::new(current, name, descriptor.clone()));
                }
                Some(info) => {
                    if info.methods.contains(&(name.to_string(), descriptor.clone())) {
                        return Resolution::Declared(MethodRef::new(current, name, descriptor.clone()));
                    }
                    match &self.superclass[&current] {
                        Some(parent) => current = parent.clone(),
                        None => return Resolution::Missing,
                    }
                }
            }
        }
    }
}

/// Builds the hierarchy index. Fails if declared classes form an
/// inheritance cycle through superclass or interface edges.
pub fn build_hierarchy(program: &ProgramDocument) -> Result<HierarchyIndex, BuildError> {
    let mut index = HierarchyIndex {
        direct_subtypes: BTreeMap::new(),
        superclass: BTreeMap::new(),
        classes: BTreeMap::new(),
    };
    for class in &program.classes {
        index.superclass.insert(class.name.clone(), class.superclass.clone());
        index.classes.insert(
            class.name.clone(),
            ClassInfo {
                is_abstract: class.is_abstract,
                methods: class
                    .methods
                    .iter()
                    .map(|m| (m.name.clone(), m.descriptor.clone()))
                    .collect(),
            },
        );
        for parent in class.superclass.iter().chain(&class.interfaces) {
            index.direct_subtypes.entry(parent.clone()).or_default().insert(class.name.clone());
        }
    }
    detect_cycle(program, &index)?;
    Ok(index)
}

fn detect_cycle(program: &ProgramDocument, index: &HierarchyIndex) -> Result<(), BuildError> {
    // Colors: 0 unvisited, 1 on stack, 2 done.
    fn visit(
        class: &str,
        program: &ProgramDocument,
        index: &HierarchyIndex,
        color: &mut BTreeMap<String, u8>,
        stack: &mut Vec<String>,
    ) -> Result<(), BuildError> {
        match color.get(class) {
            Some(1) => {
                let mut cycle: Vec<String> =
                    stack.iter().skip_while(|c| *c != class).cloned().collect();
                cycle.push(class.to_string());
                return Err(BuildError::InheritanceCycle(cycle));
            }
            Some(2) => return Ok(()),
            _ => {}
        }
        color.insert(class.to_string(), 1);
        stack.push(class.to_string());
        if let Some(model) = program.class(class) {
            for parent in model.superclass.iter().chain(&model.interfaces) {
                if index.is_declared(parent) {
                    visit(parent, program, index, color, stack)?;
                }
            }
        }
        stack.pop();
        color.insert(class.to_string(), 2);
        Ok(())
    }

    let mut color = BTreeMap::new();
    for class in &program.classes {
        let mut stack = Vec::new();
        visit(&class.name, program, index, &mut color, &mut stack)?;
    }
    Ok(())
}

/// Per-pass edge accounting, surfaced in machine reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StaticDiagnostics {
    pub init_edges: usize,
    pub cha_added: usize,
    pub rta_removed: usize,
    pub reflection_added: usize,
    pub unresolved_virtual: usize,
    pub reflective_no_target: usize,
    pub pruned_vertices: usize,
    pub pruned_edges: usize,
}

/// Knobs for the static build.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StaticConfig {
    /// Keep only entry points whose method name equals this value
    /// (e.g. `main`). None keeps every zero-in-degree first-party method.
    pub entry_point_filter: Option<String>,
}

/// Result of the full static pipeline: the pruned graph, its entry
/// points, the instantiated-class set RTA settled on, and per-pass
/// counts.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticBuild {
    pub graph: CallGraph,
    pub entry_points: EntryPointSet,
    pub instantiated: BTreeSet<String>,
    pub diagnostics: StaticDiagnostics,
}

/// Initializes the graph: one vertex per declared method, one static
/// edge per direct call site, and one edge per virtual call site
/// resolved against the declared receiver type only (subtypes come
/// later, in CHA). Declared call targets outside the document become
/// vertices too: these are the entry points of directly-called
/// libraries.
pub fn init_edges(program: &ProgramDocument, map: &OriginMap) -> Result<CallGraph, BuildError> {
    let mut diagnostics = StaticDiagnostics::default();
    init_edges_counted(program, map, &mut diagnostics)
}

fn init_edges_counted(
    program: &ProgramDocument,
    map: &OriginMap,
    diagnostics: &mut StaticDiagnostics,
) -> Result<CallGraph, BuildError> {
    let hierarchy = build_hierarchy(program)?;
    let mut graph = CallGraph::new();
    for (class, method) in program.methods() {
        let m = method.ref_in(&class.name);
        graph.add_vertex(m.clone(), map.classify(&m));
    }
    for (class, method) in program.methods() {
        let caller = method.ref_in(&class.name);
        for site in &method.call_sites {
            match site {
                CallSite::Direct { target } => {
                    if target.class_name.is_empty() {
                        return Err(BuildError::EmptyTargetClass { context: caller.to_string() });
                    }
                    graph.add_edge_with(
                        (caller.clone(), map.classify(&caller)),
                        (target.clone(), map.classify(target)),
                        Provenance::Static,
                    );
                }
                CallSite::Virtual { receiver, name, descriptor } => {
                    if receiver.is_empty() {
                        return Err(BuildError::EmptyTargetClass { context: caller.to_string() });
                    }
                    match hierarchy.resolve(receiver, name, descriptor) {
                        Resolution::Declared(target) | Resolution::External(target) => {
                            graph.add_edge_with(
                                (caller.clone(), map.classify(&caller)),
                                (target.clone(), map.classify(&target)),
                                Provenance::Static,
                            );
                        }
                        Resolution::Missing => diagnostics.unresolved_virtual += 1,
                    }
                }
                CallSite::Reflective { .. } => {}
            }
        }
    }
    diagnostics.init_edges = graph.edge_count();
    Ok(graph)
}

/// Class Hierarchy Analysis: widens every virtual call site over the
/// subtype cone of its declared receiver. For each concrete subtype the
/// edge goes to the implementation that subtype would dispatch to (its
/// own declaration or the nearest inherited one). External receiver
/// types are not expanded; their declared edge stands. Output is a
/// superset of the input.
pub fn apply_cha(
    graph: &CallGraph,
    hierarchy: &HierarchyIndex,
    program: &ProgramDocument,
    map: &OriginMap,
) -> CallGraph {
    let mut diagnostics = StaticDiagnostics::default();
    apply_cha_counted(graph, hierarchy, program, map, &mut diagnostics)
}

fn apply_cha_counted(
    graph: &CallGraph,
    hierarchy: &HierarchyIndex,
    program: &ProgramDocument,
    map: &OriginMap,
    diagnostics: &mut StaticDiagnostics,
) -> CallGraph {
    let before = graph.edge_count();
    let mut out = graph.clone();
    for (class, method) in program.methods() {
        let caller = method.ref_in(&class.name);
        for site in &method.call_sites {
            let CallSite::Virtual { receiver, name, descriptor } = site else {
                continue;
            };
            if !hierarchy.is_declared(receiver) {
                continue; // external receiver: declared edge only
            }
            for candidate in dispatch_cone(hierarchy, receiver) {
                match hierarchy.resolve(&candidate, name, descriptor) {
                    Resolution::Declared(target) | Resolution::External(target) => {
                        out.add_edge_with(
                            (caller.clone(), map.classify(&caller)),
                            (target.clone(), map.classify(&target)),
                            Provenance::Static,
                        );
                    }
                    Resolution::Missing => diagnostics.unresolved_virtual += 1,
                }
            }
        }
    }
    diagnostics.cha_added += out.edge_count() - before;
    out
}

/// The concrete classes an invocation on declared type `receiver`
/// could dispatch to: the receiver itself plus every transitive
/// subtype, concrete ones only.
fn dispatch_cone(hierarchy: &HierarchyIndex, receiver: &str) -> Vec<String> {
    let mut cone = Vec::new();
    if hierarchy.is_concrete(receiver) {
        cone.push(receiver.to_string());
    }
    for sub in hierarchy.subtypes_transitive(receiver) {
        if hierarchy.is_concrete(&sub) {
            cone.push(sub);
        }
    }
    cone
}

/// Rapid Type Analysis: keeps a virtual-dispatch edge to an
/// implementation owned by a concrete document class only when that
/// class is instantiated somewhere reachable from the seeds. The
/// instantiated set grows from the `instantiates` lists of methods as
/// they become reachable, to a fixpoint that does not depend on visit
/// order. Edges to external targets and direct-call edges are never
/// pruned, so the result is a subset of the CHA input.
pub fn apply_rta(
    graph: &CallGraph,
    hierarchy: &HierarchyIndex,
    program: &ProgramDocument,
    seeds: &EntryPointSet,
    map: &OriginMap,
) -> (CallGraph, BTreeSet<String>) {
    let mut diagnostics = StaticDiagnostics::default();
    apply_rta_counted(graph, hierarchy, program, seeds, map, &mut diagnostics)
}

fn apply_rta_counted(
    graph: &CallGraph,
    hierarchy: &HierarchyIndex,
    program: &ProgramDocument,
    seeds: &EntryPointSet,
    _map: &OriginMap,
    diagnostics: &mut StaticDiagnostics,
) -> (CallGraph, BTreeSet<String>) {
    // Which (caller, callee) pairs came from virtual dispatch, and which
    // have an independent direct-call justification.
    let mut virtual_pairs: BTreeSet<(MethodRef, MethodRef)> = BTreeSet::new();
    let mut direct_pairs: BTreeSet<(MethodRef, MethodRef)> = BTreeSet::new();
    let mut instantiates: BTreeMap<MethodRef, &[String]> = BTreeMap::new();
    for (class, method) in program.methods() {
        let caller = method.ref_in(&class.name);
        instantiates.insert(caller.clone(), &method.instantiates);
        for site in &method.call_sites {
            match site {
                CallSite::Direct { target } => {
                    direct_pairs.insert((caller.clone(), target.clone()));
                }
                CallSite::Virtual { receiver, name, descriptor } => {
                    let mut record = |resolution: Resolution| {
                        if let Resolution::Declared(t) | Resolution::External(t) = resolution {
                            virtual_pairs.insert((caller.clone(), t));
                        }
                    };
                    record(hierarchy.resolve(receiver, name, descriptor));
                    if hierarchy.is_declared(receiver) {
                        for candidate in dispatch_cone(hierarchy, receiver) {
                            record(hierarchy.resolve(&candidate, name, descriptor));
                        }
                    }
                }
                CallSite::Reflective { .. } => {}
            }
        }
    }

    // Prunable: virtual-only edges landing on a concrete document class.
    let prunable = |caller: &MethodRef, callee: &MethodRef| -> bool {
        let pair = (caller.clone(), callee.clone());
        virtual_pairs.contains(&pair)
            && !direct_pairs.contains(&pair)
            && hierarchy.is_concrete(&callee.class_name)
    };

    let mut reachable: BTreeSet<MethodRef> =
        seeds.iter().filter(|m| graph.contains_vertex(m)).cloned().collect();
    let mut instantiated: BTreeSet<String> = BTreeSet::new();
    loop {
        let mut changed = false;
        for m in reachable.clone() {
            for class in instantiates.get(&m).copied().unwrap_or(&[]) {
                changed |= instantiated.insert(class.clone());
            }
        }
        for m in reachable.clone() {
            for (callee, _) in graph.out_edges(&m) {
                let allowed = !prunable(&m, callee) || instantiated.contains(&callee.class_name);
                if allowed && !reachable.contains(callee) {
                    reachable.insert(callee.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = CallGraph::new();
    for (m, o) in graph.vertices() {
        out.add_vertex(m.clone(), o.clone());
    }
    for e in graph.edges() {
        if !prunable(&e.caller, &e.callee) || instantiated.contains(&e.callee.class_name) {
            out.add_edge(e.caller, e.callee, e.provenance);
        }
    }
    diagnostics.rta_removed += graph.edge_count() - out.edge_count();
    (out, instantiated)
}

/// Reflection pass: a reflective site with both constant arguments adds
/// edges to every document method with that class and name, across all
/// descriptors. Sites missing a constant add nothing; the result is a
/// deliberate under-approximation of reflective behavior.
pub fn apply_reflection(graph: &CallGraph, program: &ProgramDocument, map: &OriginMap) -> CallGraph {
    let mut diagnostics = StaticDiagnostics::default();
    apply_reflection_counted(graph, program, map, &mut diagnostics)
}

fn apply_reflection_counted(
    graph: &CallGraph,
    program: &ProgramDocument,
    map: &OriginMap,
    diagnostics: &mut StaticDiagnostics,
) -> CallGraph {
    let before = graph.edge_count();
    let mut by_class_and_name: BTreeMap<(&str, &str), Vec<MethodRef>> = BTreeMap::new();
    for (class, method) in program.methods() {
        by_class_and_name
            .entry((class.name.as_str(), method.name.as_str()))
            .or_default()
            .push(method.ref_in(&class.name));
    }

    let mut out = graph.clone();
    for (class, method) in program.methods() {
        let caller = method.ref_in(&class.name);
        for site in &method.call_sites {
            let CallSite::Reflective { class: Some(class_const), method: Some(method_const) } = site
            else {
                continue;
            };
            match by_class_and_name.get(&(class_const.as_str(), method_const.as_str())) {
                Some(targets) => {
                    for target in targets {
                        out.add_edge_with(
                            (caller.clone(), map.classify(&caller)),
                            (target.clone(), map.classify(target)),
                            Provenance::Static,
                        );
                    }
                }
                None => diagnostics.reflective_no_target += 1,
            }
        }
    }
    diagnostics.reflection_added += out.edge_count() - before;
    out
}

/// First-party vertices with no callers, optionally filtered by method
/// name. Analysis cannot proceed without at least one.
pub fn compute_entry_points(
    graph: &CallGraph,
    filter: Option<&str>,
) -> Result<EntryPointSet, BuildError> {
    let entry_points: EntryPointSet = graph
        .zero_in_degree()
        .filter(|m| graph.origin_of(m).is_some_and(Origin::is_first_party))
        .filter(|m| filter.is_none_or(|name| m.method_name == name))
        .cloned()
        .collect();
    if entry_points.is_empty() {
        return Err(BuildError::NoEntryPoints);
    }
    Ok(entry_points)
}

/// Runs the whole pipeline on an application document and prunes
/// everything unreachable from the entry points, so that afterwards
/// vertex membership coincides with reachability.
pub fn build_static(
    program: &ProgramDocument,
    map: &OriginMap,
    config: &StaticConfig,
) -> Result<StaticBuild, BuildError> {
    if !program.is_application() {
        return Err(BuildError::NotAnApplication);
    }
    let mut diagnostics = StaticDiagnostics::default();
    let hierarchy = build_hierarchy(program)?;
    let initial = init_edges_counted(program, map, &mut diagnostics)?;
    let widened = apply_cha_counted(&initial, &hierarchy, program, map, &mut diagnostics);

    // RTA seeds: the zero-in-degree first-party methods of the CHA graph.
    let seeds = compute_entry_points(&widened, None)?;
    let (narrowed, instantiated) =
        apply_rta_counted(&widened, &hierarchy, program, &seeds, map, &mut diagnostics);
    let reflected = apply_reflection_counted(&narrowed, program, map, &mut diagnostics);

    let entry_points = compute_entry_points(&reflected, config.entry_point_filter.as_deref())?;
    let graph = reflected.prune_unreachable(entry_points.iter());
    diagnostics.pruned_vertices = reflected.vertex_count() - graph.vertex_count();
    diagnostics.pruned_edges = reflected.edge_count() - graph.edge_count();

    Ok(StaticBuild { graph, entry_points, instantiated, diagnostics })
}

/// Shared by the library-side chain precomputation: init plus CHA, no
/// RTA (there is no usage context to seed it with) and no reflection.
pub(crate) fn cha_graph(program: &ProgramDocument, map: &OriginMap) -> Result<CallGraph, BuildError> {
    let hierarchy = build_hierarchy(program)?;
    let initial = init_edges(program, map)?;
    Ok(apply_cha(&initial, &hierarchy, program, map))
}
