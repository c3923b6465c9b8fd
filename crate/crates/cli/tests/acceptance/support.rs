//! Generators and independent oracles for the acceptance suite.
//!
//! Each oracle re-derives the expected answer from first principles
//! (its own adjacency structures and traversal), never by calling the
//! code path under test.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::rngs::StdRng;
use rand::Rng;

use sca_core::depres::{BoundOp, Constraint};
use sca_core::formats::{
    CallSite, ClassModel, DependencyDecl, DocumentOrigin, ManifestDocument, MethodModel,
    ProgramDocument, RegistryDocument, Visibility,
};
use sca_core::{
    CallChain, CallGraph, Coordinate, Descriptor, MethodRef, Origin, PackageId, Provenance,
    Version,
};

pub fn mref(text: &str) -> MethodRef {
    MethodRef::parse(text).unwrap()
}

pub fn test_library() -> Coordinate {
    Coordinate::new("gen", "lib", Version::new(1, 0, 0))
}

// ---------------------------------------------------------------------------
// Rooted graph + chain instances (merge safety, membership oracle)
// ---------------------------------------------------------------------------

pub struct MergeInstance {
    pub graph: CallGraph,
    pub roots: BTreeSet<MethodRef>,
    pub chains: Vec<CallChain>,
}

/// A random graph of up to 30 vertices in which every vertex is
/// reachable from one of 1..=3 first-party roots and the roots have no
/// incoming edges, plus 1..=5 chains mixing existing and fresh vertices.
pub fn merge_instance(rng: &mut StdRng) -> MergeInstance {
    let n = rng.random_range(2..=30usize);
    let roots_count = rng.random_range(1..=3usize.min(n));
    let refs: Vec<MethodRef> = (0..n).map(|i| mref(&format!("p.M{i}.f()"))).collect();

    let mut graph = CallGraph::new();
    for (i, m) in refs.iter().enumerate() {
        let origin = if i < roots_count || rng.random_bool(0.6) {
            Origin::FirstParty
        } else {
            Origin::ThirdParty(test_library())
        };
        graph.add_vertex(m.clone(), origin);
    }
    // spanning edges guarantee reachability from the roots
    for i in roots_count..n {
        let parent = rng.random_range(0..i);
        let provenance = if rng.random_bool(0.7) { Provenance::Static } else { Provenance::Dynamic };
        graph.add_edge(refs[parent].clone(), refs[i].clone(), provenance);
    }
    // extra edges, never into a root
    for _ in 0..rng.random_range(0..=n) {
        let from = rng.random_range(0..n);
        let to = rng.random_range(roots_count..n.max(roots_count + 1));
        if from != to && to < n {
            graph.add_edge(refs[from].clone(), refs[to].clone(), Provenance::Static);
        }
    }

    let mut chains = Vec::new();
    let mut fresh = 0usize;
    for _ in 0..rng.random_range(1..=5usize) {
        let len = rng.random_range(1..=5usize);
        let mut vertices = Vec::with_capacity(len + 1);
        for _ in 0..=len {
            let vertex = if rng.random_bool(0.5) {
                refs[rng.random_range(0..n)].clone()
            } else {
                fresh += 1;
                mref(&format!("x.N{fresh}.g()"))
            };
            if vertices.last() == Some(&vertex) {
                continue; // no self-edges
            }
            vertices.push(vertex);
        }
        if vertices.len() < 2 {
            continue;
        }
        let edges: Vec<_> = vertices.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        let sink = edges.last().unwrap().1.clone();
        let chain = CallChain::new(edges, sink, test_library());
        chain.validate().unwrap();
        chains.push(chain);
    }

    let roots = refs[..roots_count].iter().cloned().collect();
    MergeInstance { graph, roots, chains }
}

/// Plain DFS over an explicit edge list, independent of the graph's own
/// adjacency indexes.
pub fn oracle_reachable(graph: &CallGraph, roots: &BTreeSet<MethodRef>) -> BTreeSet<MethodRef> {
    let mut adjacency: BTreeMap<MethodRef, Vec<MethodRef>> = BTreeMap::new();
    for edge in graph.edges() {
        adjacency.entry(edge.caller).or_default().push(edge.callee);
    }
    let mut seen: BTreeSet<MethodRef> = roots
        .iter()
        .filter(|r| graph.contains_vertex(r))
        .cloned()
        .collect();
    let mut stack: Vec<MethodRef> = seen.iter().cloned().collect();
    while let Some(current) = stack.pop() {
        for next in adjacency.get(&current).into_iter().flatten() {
            if seen.insert(next.clone()) {
                stack.push(next.clone());
            }
        }
    }
    seen
}

// ---------------------------------------------------------------------------
// Random programs (CHA oracle, pass ordering)
// ---------------------------------------------------------------------------

const SIGNATURES: &[(&str, &str, &str)] = &[("m", "", "V"), ("n", "", "V"), ("f", "I", "V")];

/// Random application of up to `max_classes` classes with single
/// inheritance (acyclic by construction), occasional external
/// supertypes, and direct / virtual / reflective call sites. A root
/// class with a `main` method is always present and never targeted.
pub fn random_program(rng: &mut StdRng, max_classes: usize) -> ProgramDocument {
    let class_count = rng.random_range(1..=max_classes);
    let names: Vec<String> = (0..class_count).map(|i| format!("gen.C{i}")).collect();

    let mut classes = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let superclass = if i > 0 && rng.random_bool(0.5) {
            Some(names[rng.random_range(0..i)].clone())
        } else if rng.random_bool(0.15) {
            Some("ext.Base".to_string())
        } else {
            None
        };
        let mut methods = Vec::new();
        for (method, params, ret) in SIGNATURES {
            if rng.random_bool(0.55) {
                methods.push(MethodModel {
                    name: (*method).to_string(),
                    descriptor: Descriptor::new(*params, *ret),
                    visibility: Visibility::Public,
                    is_static: false,
                    body_digest: format!("{:06x}", rng.random_range(0..0xffffffu32)),
                    instantiates: names
                        .iter()
                        .filter(|_| rng.random_bool(0.2))
                        .cloned()
                        .collect(),
                    call_sites: random_sites(rng, &names),
                });
            }
        }
        classes.push(ClassModel {
            name: name.clone(),
            superclass,
            interfaces: vec![],
            is_abstract: rng.random_bool(0.25),
            methods,
        });
    }
    classes.push(ClassModel {
        name: "gen.Root".to_string(),
        superclass: None,
        interfaces: vec![],
        is_abstract: false,
        methods: vec![MethodModel {
            name: "main".to_string(),
            descriptor: Descriptor::new("", "V"),
            visibility: Visibility::Public,
            is_static: true,
            body_digest: "facade".to_string(),
            instantiates: names.iter().filter(|_| rng.random_bool(0.4)).cloned().collect(),
            call_sites: random_sites(rng, &names),
        }],
    });
    ProgramDocument { origin: DocumentOrigin::Application, classes }
}

fn random_sites(rng: &mut StdRng, names: &[String]) -> Vec<CallSite> {
    let mut sites = Vec::new();
    for _ in 0..rng.random_range(0..=3usize) {
        if names.is_empty() {
            break;
        }
        let class = names[rng.random_range(0..names.len())].clone();
        let (method, params, ret) = SIGNATURES[rng.random_range(0..SIGNATURES.len())];
        match rng.random_range(0..10) {
            0..=3 => sites.push(CallSite::Direct {
                target: MethodRef::new(class, method, Descriptor::new(params, ret)),
            }),
            4..=7 => {
                let receiver = if rng.random_bool(0.85) { class } else { "ext.Base".to_string() };
                sites.push(CallSite::Virtual {
                    receiver,
                    name: method.to_string(),
                    descriptor: Descriptor::new(params, ret),
                });
            }
            _ => sites.push(CallSite::Reflective {
                class: rng.random_bool(0.7).then_some(class),
                method: rng.random_bool(0.7).then(|| method.to_string()),
            }),
        }
    }
    sites
}

/// Brute-force CHA oracle: for every call site, enumerate the edges it
/// must contribute. Virtual sites get the declared-type resolution plus
/// the dispatch target of every concrete class that is a subtype of the
/// receiver; dispatch walks the superclass chain independently of the
/// hierarchy index.
pub fn oracle_cha_edges(program: &ProgramDocument) -> BTreeSet<(MethodRef, MethodRef)> {
    let by_name: BTreeMap<&str, &ClassModel> =
        program.classes.iter().map(|c| (c.name.as_str(), c)).collect();

    let declares = |class: &str, name: &str, descriptor: &Descriptor| -> bool {
        by_name
            .get(class)
            .is_some_and(|c| c.methods.iter().any(|m| m.name == name && m.descriptor == *descriptor))
    };
    // own declaration, else nearest superclass declaration, else the
    // first external ancestor, else nothing
    let resolve = |start: &str, name: &str, descriptor: &Descriptor| -> Option<MethodRef> {
        let mut current = start.to_string();
        loop {
            if !by_name.contains_key(current.as_str()) {
                return Some(MethodRef::new(current, name, descriptor.clone()));
            }
            if declares(&current, name, descriptor) {
                return Some(MethodRef::new(current, name, descriptor.clone()));
            }
            match &by_name[current.as_str()].superclass {
                Some(parent) => current = parent.clone(),
                None => return None,
            }
        }
    };
    let is_subtype_of = |class: &str, ancestor: &str| -> bool {
        let mut frontier = vec![class.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(current) = frontier.pop() {
            if current == ancestor {
                return true;
            }
            if !seen.insert(current.clone()) {
                continue;
            }
            if let Some(model) = by_name.get(current.as_str()) {
                frontier.extend(model.superclass.iter().cloned());
                frontier.extend(model.interfaces.iter().cloned());
            }
        }
        false
    };

    let mut edges = BTreeSet::new();
    for class in &program.classes {
        for method in &class.methods {
            let caller = method.ref_in(&class.name);
            for site in &method.call_sites {
                match site {
                    CallSite::Direct { target } => {
                        edges.insert((caller.clone(), target.clone()));
                    }
                    CallSite::Virtual { receiver, name, descriptor } => {
                        if let Some(target) = resolve(receiver, name, descriptor) {
                            edges.insert((caller.clone(), target));
                        }
                        if by_name.contains_key(receiver.as_str()) {
                            for candidate in program.classes.iter().filter(|c| !c.is_abstract) {
                                if is_subtype_of(&candidate.name, receiver) {
                                    if let Some(target) = resolve(&candidate.name, name, descriptor) {
                                        edges.insert((caller.clone(), target));
                                    }
                                }
                            }
                        }
                    }
                    CallSite::Reflective { .. } => {}
                }
            }
        }
    }
    edges
}

// ---------------------------------------------------------------------------
// Random library graphs (chain completeness)
// ---------------------------------------------------------------------------

pub struct LibraryInstance {
    pub graph: CallGraph,
    pub entries: BTreeSet<MethodRef>,
    pub sinks: Vec<MethodRef>,
}

pub fn library_instance(rng: &mut StdRng) -> LibraryInstance {
    let n = rng.random_range(2..=12usize);
    let refs: Vec<MethodRef> = (0..n).map(|i| mref(&format!("l.C{i}.m()"))).collect();
    let mut graph = CallGraph::new();
    let origin = Origin::ThirdParty(test_library());
    for m in &refs {
        graph.add_vertex(m.clone(), origin.clone());
    }
    for from in 0..n {
        for to in 0..n {
            if from != to && rng.random_bool(2.0 / n as f64) {
                graph.add_edge(refs[from].clone(), refs[to].clone(), Provenance::Static);
            }
        }
    }
    let entries: BTreeSet<MethodRef> =
        refs.iter().filter(|_| rng.random_bool(0.4)).cloned().collect();
    let sinks: Vec<MethodRef> = (0..rng.random_range(1..=2usize))
        .map(|_| refs[rng.random_range(0..n)].clone())
        .collect();
    LibraryInstance { graph, entries, sinks }
}

/// All simple paths from any entry to the sink with at most `max_edges`
/// edges, as vertex sequences. Recursion stops at the sink: a simple
/// path cannot revisit it.
pub fn oracle_simple_paths(
    graph: &CallGraph,
    entries: &BTreeSet<MethodRef>,
    sink: &MethodRef,
    max_edges: usize,
) -> BTreeSet<Vec<MethodRef>> {
    let mut adjacency: BTreeMap<MethodRef, BTreeSet<MethodRef>> = BTreeMap::new();
    for edge in graph.edges() {
        adjacency.entry(edge.caller).or_default().insert(edge.callee);
    }

    fn explore(
        adjacency: &BTreeMap<MethodRef, BTreeSet<MethodRef>>,
        sink: &MethodRef,
        max_edges: usize,
        path: &mut Vec<MethodRef>,
        found: &mut BTreeSet<Vec<MethodRef>>,
    ) {
        let current = path.last().unwrap().clone();
        if current == *sink && path.len() > 1 {
            found.insert(path.clone());
            return;
        }
        if path.len() > max_edges {
            return;
        }
        for next in adjacency.get(&current).into_iter().flatten() {
            if path.contains(next) {
                continue;
            }
            path.push(next.clone());
            explore(adjacency, sink, max_edges, path, found);
            path.pop();
        }
    }

    let mut found = BTreeSet::new();
    for entry in entries {
        if entry == sink || !graph.contains_vertex(entry) {
            continue;
        }
        let mut path = vec![entry.clone()];
        explore(&adjacency, sink, max_edges, &mut path, &mut found);
    }
    found
}

// ---------------------------------------------------------------------------
// Random registries (Maven oracle)
// ---------------------------------------------------------------------------

pub fn registry_instance(rng: &mut StdRng) -> (ManifestDocument, RegistryDocument) {
    let package_count = rng.random_range(1..=20usize);
    let packages: Vec<PackageId> =
        (0..package_count).map(|i| PackageId::new("gen", format!("p{i}"))).collect();

    let mut versions_of: BTreeMap<PackageId, Vec<Version>> = BTreeMap::new();
    for package in &packages {
        let mut versions = BTreeSet::new();
        for _ in 0..rng.random_range(1..=5usize) {
            versions.insert(Version::new(
                rng.random_range(0..4),
                rng.random_range(0..4),
                rng.random_range(0..4),
            ));
        }
        versions_of.insert(package.clone(), versions.into_iter().collect());
    }

    // constraints are built around an existing version, so resolution
    // always succeeds and the oracle never has to model failure order
    let constraint_on = |package: &PackageId, rng: &mut StdRng| -> Constraint {
        let versions = &versions_of[package];
        let version = versions[rng.random_range(0..versions.len())].clone();
        match rng.random_range(0..4) {
            0 => Constraint::Exact(version),
            1 => Constraint::Caret(version),
            2 => Constraint::Tilde(version),
            _ => Constraint::Range(vec![(BoundOp::Ge, Version::new(0, 0, 0)), (BoundOp::Le, version)]),
        }
    };

    let mut registry = RegistryDocument::default();
    for package in &packages {
        let mut by_version = BTreeMap::new();
        for version in &versions_of[package] {
            let mut deps = Vec::new();
            for _ in 0..rng.random_range(0..=3usize) {
                let target = &packages[rng.random_range(0..packages.len())];
                if target == package {
                    continue;
                }
                let constraint = constraint_on(target, rng);
                deps.push(DependencyDecl { package: target.clone(), constraint });
            }
            by_version.insert(version.clone(), deps);
        }
        registry.packages.insert(package.clone(), by_version);
    }

    let mut manifest = ManifestDocument::default();
    let mut direct: Vec<&PackageId> = packages.iter().collect();
    // declaration order matters for mediation ties; shuffle by index draws
    for i in (1..direct.len()).rev() {
        direct.swap(i, rng.random_range(0..=i));
    }
    for package in direct.into_iter().take(rng.random_range(1..=packages.len().min(5))) {
        let constraint = constraint_on(package, rng);
        manifest.dependencies.push(DependencyDecl { package: package.clone(), constraint });
    }
    (manifest, registry)
}

/// Independent nearest-definition resolution: explicit wave-by-wave
/// expansion with breadcrumb ordering instead of a work queue. Returns
/// the winning (version, constraint, depth) per package.
pub fn oracle_maven(
    manifest: &ManifestDocument,
    registry: &RegistryDocument,
) -> Option<BTreeMap<PackageId, (Version, Constraint, usize)>> {
    let mut winners: BTreeMap<PackageId, (Version, Constraint, usize)> = BTreeMap::new();
    let mut wave: Vec<(PackageId, Constraint, Vec<usize>)> = manifest
        .dependencies
        .iter()
        .enumerate()
        .map(|(i, d)| (d.package.clone(), d.constraint.clone(), vec![i]))
        .collect();
    let mut depth = 1usize;
    while !wave.is_empty() {
        wave.sort_by(|a, b| a.2.cmp(&b.2));
        let mut next = Vec::new();
        for (package, constraint, crumb) in wave {
            if winners.contains_key(&package) {
                continue;
            }
            let versions = registry.packages.get(&package)?;
            let version = versions.keys().rev().find(|v| constraint.satisfies(v))?.clone();
            for (j, dep) in versions[&version].iter().enumerate() {
                let mut child = crumb.clone();
                child.push(j);
                next.push((dep.package.clone(), dep.constraint.clone(), child));
            }
            winners.insert(package.clone(), (version, constraint, depth));
        }
        wave = next;
        depth += 1;
    }
    Some(winners)
}

// ---------------------------------------------------------------------------
// Reverse reachability (semantic closure oracle)
// ---------------------------------------------------------------------------

pub fn oracle_reverse_reachability(
    graph: &CallGraph,
    seeds: &BTreeSet<MethodRef>,
) -> BTreeSet<MethodRef> {
    let mut reverse: BTreeMap<MethodRef, Vec<MethodRef>> = BTreeMap::new();
    for edge in graph.edges() {
        reverse.entry(edge.callee).or_default().push(edge.caller);
    }
    let mut closure = seeds.clone();
    let mut queue: VecDeque<MethodRef> = seeds.iter().cloned().collect();
    while let Some(current) = queue.pop_front() {
        for caller in reverse.get(&current).into_iter().flatten() {
            if closure.insert(caller.clone()) {
                queue.push_back(caller.clone());
            }
        }
    }
    closure
}

/// Random graph over `n` vertices with arbitrary origins; used for the
/// closure oracle where entry points play no role.
pub fn plain_graph(rng: &mut StdRng, max_vertices: usize) -> CallGraph {
    let n = rng.random_range(1..=max_vertices);
    let refs: Vec<MethodRef> = (0..n).map(|i| mref(&format!("g.V{i}.f()"))).collect();
    let mut graph = CallGraph::new();
    for m in &refs {
        graph.add_vertex(m.clone(), Origin::ThirdParty(test_library()));
    }
    for from in 0..n {
        for to in 0..n {
            if from != to && rng.random_bool((1.8 / n as f64).min(1.0)) {
                graph.add_edge(refs[from].clone(), refs[to].clone(), Provenance::Static);
            }
        }
    }
    graph
}
