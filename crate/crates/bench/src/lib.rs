//! Deterministic synthetic workloads for benchmarking: applications
//! with deep class hierarchies and virtual dispatch, libraries with
//! fan-out call structure, and registries with transitive dependency
//! trees. Everything is seeded, so runs are comparable.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sca_core::depres::Constraint;
use sca_core::formats::{
    CallSite, ClassModel, DependencyDecl, DocumentOrigin, ManifestDocument, MethodModel,
    ProgramDocument, RegistryDocument, TraceDocument, TraceEvent, Visibility,
};
use sca_core::{Coordinate, Descriptor, MethodRef, PackageId, Version};

fn method(name: &str, rng: &mut StdRng, calls: Vec<CallSite>, instantiates: Vec<String>) -> MethodModel {
    MethodModel {
        name: name.to_string(),
        descriptor: Descriptor::new("", "V"),
        visibility: Visibility::Public,
        is_static: false,
        body_digest: format!("{:08x}", rng.random_range(0..u32::MAX)),
        instantiates,
        call_sites: calls,
    }
}

/// An application of `class_count` classes: a third of them form
/// inheritance families with virtual dispatch on the family roots, the
/// rest chain direct calls; a `main` entry point instantiates a sample
/// of the leaves.
pub fn synth_app(class_count: usize, seed: u64) -> ProgramDocument {
    let mut rng = StdRng::seed_from_u64(seed);
    let names: Vec<String> = (0..class_count).map(|i| format!("app.C{i}")).collect();
    let mut classes = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let family_root = i % 3 == 0;
        // families of three: the root, then two subclasses of it
        let superclass = if family_root { None } else { Some(names[i - (i % 3)].clone()) };
        let mut calls = Vec::new();
        if family_root && i + 3 < class_count {
            calls.push(CallSite::Virtual {
                receiver: names[i].clone(),
                name: "work".to_string(),
                descriptor: Descriptor::new("", "V"),
            });
        }
        if i + 1 < class_count {
            calls.push(CallSite::Direct {
                target: MethodRef::new(names[i + 1].clone(), "work", Descriptor::new("", "V")),
            });
        }
        let work = method("work", &mut rng, calls, vec![]);
        classes.push(ClassModel {
            name: name.clone(),
            superclass,
            interfaces: vec![],
            is_abstract: family_root && rng.random_bool(0.5),
            methods: vec![work],
        });
    }
    let instantiated: Vec<String> =
        names.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
    let entry_calls = vec![CallSite::Direct {
        target: MethodRef::new(names[0].clone(), "work", Descriptor::new("", "V")),
    }];
    classes.push(ClassModel {
        name: "app.Main".to_string(),
        superclass: None,
        interfaces: vec![],
        is_abstract: false,
        methods: vec![method("main", &mut rng, entry_calls, instantiated)],
    });
    ProgramDocument { origin: DocumentOrigin::Application, classes }
}

/// A library with `method_count` methods in a layered call structure:
/// each method calls up to three methods of the next layer, so paths to
/// the deepest layer are plentiful but bounded.
pub fn synth_library(method_count: usize, seed: u64) -> ProgramDocument {
    let mut rng = StdRng::seed_from_u64(seed);
    let layer_size = 8usize;
    let names: Vec<String> = (0..method_count).map(|i| format!("lib.L{}.m{i}", i / layer_size)).collect();
    let refs: Vec<MethodRef> = names
        .iter()
        .map(|n| MethodRef::parse(&format!("{n}()V")).unwrap())
        .collect();
    let mut classes: Vec<ClassModel> = Vec::new();
    for (i, r) in refs.iter().enumerate() {
        let next_layer_start = (i / layer_size + 1) * layer_size;
        let mut calls = Vec::new();
        for _ in 0..3 {
            if next_layer_start < method_count {
                let j = next_layer_start
                    + rng.random_range(0..layer_size.min(method_count - next_layer_start));
                calls.push(CallSite::Direct { target: refs[j].clone() });
            }
        }
        let model = method(&r.method_name, &mut rng, calls, vec![]);
        match classes.iter_mut().find(|c| c.name == r.class_name) {
            Some(class) => class.methods.push(model),
            None => classes.push(ClassModel {
                name: r.class_name.clone(),
                superclass: None,
                interfaces: vec![],
                is_abstract: false,
                methods: vec![model],
            }),
        }
    }
    ProgramDocument {
        origin: DocumentOrigin::Library(Coordinate::new("bench", "lib", Version::new(1, 0, 0))),
        classes,
    }
}

/// The deepest method of the synthetic library, used as the sink.
pub fn deepest_method(library: &ProgramDocument) -> MethodRef {
    library
        .methods()
        .map(|(c, m)| m.ref_in(&c.name))
        .max_by_key(|m| m.class_name.clone())
        .expect("library not empty")
}

/// A registry of `package_count` packages, three versions each, with a
/// dependency fan-out of up to four per version, plus a manifest naming
/// five roots.
pub fn synth_registry(package_count: usize, seed: u64) -> (ManifestDocument, RegistryDocument) {
    let mut rng = StdRng::seed_from_u64(seed);
    let packages: Vec<PackageId> =
        (0..package_count).map(|i| PackageId::new("bench", format!("pkg{i}"))).collect();
    let mut registry = RegistryDocument::default();
    for (i, package) in packages.iter().enumerate() {
        let mut versions = std::collections::BTreeMap::new();
        for minor in 0..3u64 {
            let mut deps = Vec::new();
            for _ in 0..rng.random_range(0..=4usize) {
                // depend only on later packages: plenty of depth, no cycles
                if i + 1 < package_count {
                    let j = rng.random_range(i + 1..package_count);
                    deps.push(DependencyDecl {
                        package: packages[j].clone(),
                        constraint: Constraint::Caret(Version::new(1, rng.random_range(0..3), 0)),
                    });
                }
            }
            versions.insert(Version::new(1, minor, 0), deps);
        }
        registry.packages.insert(package.clone(), versions);
    }
    let manifest = ManifestDocument {
        dependencies: packages
            .iter()
            .take(5)
            .map(|p| DependencyDecl { package: p.clone(), constraint: Constraint::Caret(Version::new(1, 0, 0)) })
            .collect(),
    };
    (manifest, registry)
}

/// A trace that walks the synthetic app from a framework entry.
pub fn synth_trace(app: &ProgramDocument, seed: u64) -> TraceDocument {
    let mut rng = StdRng::seed_from_u64(seed);
    let methods: Vec<MethodRef> = app.methods().map(|(c, m)| m.ref_in(&c.name)).collect();
    let mut events = vec![TraceEvent {
        caller: MethodRef::parse("org.junit.Runner.run()V").unwrap(),
        callee: MethodRef::parse("app.MainTest.test()V").unwrap(),
    }];
    let mut current = MethodRef::parse("app.MainTest.test()V").unwrap();
    for _ in 0..methods.len() {
        let next = methods[rng.random_range(0..methods.len())].clone();
        events.push(TraceEvent { caller: current.clone(), callee: next.clone() });
        current = next;
    }
    TraceDocument { events }
}
