//! Acceptance suite. Each test enforces one acceptance criterion at its
//! stated size and tolerance and prints one PASS line when it holds.
//!
//! Randomized criteria use fixed seeds so every run checks the same
//! instances; oracles live in `support` and never share code with the
//! implementation paths they check.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sca_core::chains::{enumerate_chains, ChainLimits, LibrarySurface};
use sca_core::compose::{merge_chain, merge_chains, reachable_sinks, union, MergeMode};
use sca_core::depres::{resolve_declared, resolve_maven, resolve_npm};
use sca_core::dynamic_cg::build_dynamic;
use sca_core::formats::{self, load_manifest, load_program, load_registry, load_trace, load_vulndb};
use sca_core::remediate::{semantic_closure, VersionDiff};
use sca_core::static_cg::{apply_cha, apply_rta, build_hierarchy, build_static, compute_entry_points, init_edges, StaticConfig};
use sca_core::{Coordinate, EntryPointSet, MethodRef, OriginMap, Version};

use support::*;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn read(rel: &str) -> Vec<u8> {
    std::fs::read(fixture(rel)).unwrap_or_else(|e| panic!("reading fixture {rel}: {e}"))
}

fn golden_refs(rel: &str) -> BTreeSet<String> {
    serde_json::from_slice::<Vec<String>>(&read(rel)).unwrap().into_iter().collect()
}

fn canonical_vertices(graph: &sca_core::CallGraph) -> BTreeSet<String> {
    graph.vertices().map(|(m, _)| m.canonical()).collect()
}

fn sca(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sca"))
        .args(args)
        .env_remove("SCA_CONFIG")
        .output()
        .expect("sca binary runs")
}

fn fig3_origin_map() -> OriginMap {
    let mut map = formats::load_origins(&read("fig3/origins.json")).unwrap();
    let mut full = OriginMap::default();
    full.push_rule("org.junit.", sca_core::Origin::Framework("org.junit.".into()));
    full.rules.extend(map.rules.drain(..));
    full
}

fn reach_args(trace: &str) -> Vec<String> {
    [
        "reach",
        "--program",
        fixture("fig3/app.json").to_str().unwrap(),
        "--trace",
        fixture(trace).to_str().unwrap(),
        "--chains",
        fixture("fig3/chains").to_str().unwrap(),
        "--vulndb",
        fixture("fig3/vulndb.json").to_str().unwrap(),
        "--origins",
        fixture("fig3/origins.json").to_str().unwrap(),
        "--manifest",
        fixture("fig3/manifest.json").to_str().unwrap(),
        "--registry",
        fixture("fig3/registry.json").to_str().unwrap(),
        "--mode",
        "maven",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Criterion 1: the composed-graph fixture end to end, against golden
/// files, in under a second.
#[test]
fn fig3_end_to_end() {
    let started = Instant::now();
    let map = fig3_origin_map();
    let app = load_program(&read("fig3/app.json")).unwrap();
    let build = build_static(&app, &map, &StaticConfig::default()).unwrap();

    assert_eq!(canonical_vertices(&build.graph), golden_refs("fig3/golden/static-vertices.json"));
    let entry_points: BTreeSet<String> = build.entry_points.iter().map(MethodRef::canonical).collect();
    assert_eq!(entry_points, golden_refs("fig3/golden/entry-points.json"));

    let chain_files = vec![
        formats::load_chains(&read("fig3/chains/org.example__lib-p__2.1.0.json")).unwrap(),
        formats::load_chains(&read("fig3/chains/org.example__lib-u__1.2.0.json")).unwrap(),
    ];
    let (merged, _) = merge_chains(&build.graph, &chain_files, MergeMode::Fold);
    assert_eq!(
        canonical_vertices(&merged),
        golden_refs("fig3/golden/merged-static-vertices.json"),
        "merging adds exactly V"
    );

    // chains rooted at X, Y, and P add nothing on their own
    for chain in chain_files.iter().flat_map(|f| &f.chains) {
        if chain.entry().method_name != "U" {
            assert_eq!(merge_chain(&build.graph, chain), build.graph, "{} anchors nowhere", chain.entry());
        }
    }

    let dynamic = build_dynamic(&[load_trace(&read("fig3/trace.jsonl")).unwrap()], &map);
    assert_eq!(canonical_vertices(&dynamic.graph), golden_refs("fig3/golden/gd-prime-vertices.json"));

    let combined = union(&build.graph, &dynamic.graph);
    let (composed, _) = merge_chains(&combined, &chain_files, MergeMode::Fold);
    assert_eq!(canonical_vertices(&composed), golden_refs("fig3/golden/gc-vertices.json"));

    // sink Q: unreachable statically, reachable once the trace bridges R -> P
    let vulndb = load_vulndb(&read("fig3/vulndb.json")).unwrap();
    let present: BTreeSet<Coordinate> = [
        Coordinate::parse("org.example:lib-u@1.2.0").unwrap(),
        Coordinate::parse("org.example:lib-p@2.1.0").unwrap(),
    ]
    .into();
    let eps = build.entry_points.merged(&dynamic.roots);
    let by_vuln = |findings: Vec<sca_core::compose::Finding>| -> BTreeMap<String, bool> {
        findings.into_iter().map(|f| (f.vuln_id.clone(), f.reachable())).collect()
    };
    let base = by_vuln(reachable_sinks(&composed, &vulndb, &present, &eps));
    assert_eq!(base["VULN-0001"], true);
    assert_eq!(base["VULN-0002"], false);
    assert_eq!(base["VULN-0003"], false);

    let extended_dynamic =
        build_dynamic(&[load_trace(&read("fig3/trace-extended.jsonl")).unwrap()], &map);
    let (extended, _) = merge_chains(
        &union(&build.graph, &extended_dynamic.graph),
        &chain_files,
        MergeMode::Fold,
    );
    let eps = build.entry_points.merged(&extended_dynamic.roots);
    let extended = by_vuln(reachable_sinks(&extended, &vulndb, &present, &eps));
    assert_eq!(extended["VULN-0002"], true, "R -> P bridge anchors the P -> Q chain");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "end-to-end took {elapsed:?}");

    // the CLI reproduces the committed golden reports byte for byte
    for (trace, golden) in [
        ("fig3/trace.jsonl", "fig3/golden/report-base.json"),
        ("fig3/trace-extended.jsonl", "fig3/golden/report-extended.json"),
    ] {
        let out = sca(&reach_args(trace));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(out.stdout, read(golden), "report for {trace} drifted from golden");
    }

    // chain precomputation regenerates the committed fixtures byte for byte
    let out_dir = tempfile::tempdir().unwrap();
    let out = sca(&[
        "chains".into(),
        "--program".into(),
        fixture("fig3/lib-u.json").display().to_string(),
        "--program".into(),
        fixture("fig3/lib-p.json").display().to_string(),
        "--vulndb".into(),
        fixture("fig3/vulndb.json").display().to_string(),
        "--out-dir".into(),
        out_dir.path().display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for name in ["org.example__lib-u__1.2.0.json", "org.example__lib-p__2.1.0.json"] {
        let regenerated = std::fs::read(out_dir.path().join(name)).unwrap();
        assert_eq!(regenerated, read(&format!("fig3/chains/{name}")), "{name} drifted");
    }

    println!("ACCEPTANCE PASS: fig3 end-to-end (goldens, {elapsed:?} < 1s)");
}

/// Criteria 2 and 3: merge safety and membership-equals-reachability on
/// 1,000 randomized instances of up to 30 vertices.
#[test]
fn merge_safety_and_membership() {
    let mut rng = StdRng::seed_from_u64(0x5caac2);
    let mut merges = 0usize;
    for instance in 0..1000 {
        let MergeInstance { graph, roots, chains } = merge_instance(&mut rng);
        let zero_before: BTreeSet<MethodRef> = graph.zero_in_degree().cloned().collect();

        let mut merged = graph.clone();
        for chain in &chains {
            merged = merge_chain(&merged, chain);
        }
        merges += chains.len();

        // the zero-in-degree set never gains members
        let zero_after: BTreeSet<MethodRef> = merged.zero_in_degree().cloned().collect();
        assert!(
            zero_after.is_subset(&zero_before),
            "instance {instance}: new entry points {:?}",
            zero_after.difference(&zero_before).collect::<Vec<_>>()
        );

        // every vertex remains reachable from a first-party entry point
        let reachable = oracle_reachable(&merged, &roots);
        assert_eq!(
            reachable.len(),
            merged.vertex_count(),
            "instance {instance}: unreachable vertices exist"
        );

        // membership check == path existence, probed on every chain sink
        // and on refs that are not vertices at all
        let mut probes: Vec<MethodRef> = chains.iter().map(|c| c.sink.clone()).collect();
        probes.push(mref("zz.Absent.a()"));
        probes.push(mref(&format!("x.N{}.g()", 10_000 + instance)));
        for probe in probes {
            let member = merged.contains_vertex(&probe);
            let path_exists = reachable.contains(&probe);
            assert_eq!(member, path_exists, "instance {instance}: membership vs path for {probe}");
        }
    }
    println!("ACCEPTANCE PASS: merge safety + membership oracle (1000 instances, {merges} merges, 0 violations)");
}

/// Criterion 4: pass ordering on randomized programs and the fixture,
/// and CHA equals exhaustive dispatch enumeration on hierarchies of up
/// to 10 classes.
#[test]
fn static_pass_ordering_and_cha_oracle() {
    let mut rng = StdRng::seed_from_u64(0x5cac4a);
    let map = OriginMap::default();
    let mut with_rta = 0usize;
    for instance in 0..300 {
        let program = random_program(&mut rng, 9);
        let hierarchy = build_hierarchy(&program).unwrap();
        let initial = init_edges(&program, &map).unwrap();
        let widened = apply_cha(&initial, &hierarchy, &program, &map);

        let init_set: BTreeSet<_> = initial.edge_set();
        let cha_set: BTreeSet<_> = widened.edge_set();
        assert!(init_set.is_subset(&cha_set), "instance {instance}: init ⊆ CHA violated");

        let oracle: BTreeSet<(MethodRef, MethodRef)> = oracle_cha_edges(&program);
        let actual: BTreeSet<(MethodRef, MethodRef)> =
            widened.edges().map(|e| (e.caller, e.callee)).collect();
        assert_eq!(actual, oracle, "instance {instance}: CHA disagrees with dispatch enumeration");

        if let Ok(seeds) = compute_entry_points(&widened, None) {
            let (narrowed, _) = apply_rta(&widened, &hierarchy, &program, &seeds, &map);
            assert!(
                narrowed.edge_set().is_subset(&cha_set),
                "instance {instance}: RTA ⊆ CHA violated"
            );
            with_rta += 1;
        }
    }

    // and on the committed fixture
    let map = fig3_origin_map();
    let app = load_program(&read("fig3/app.json")).unwrap();
    let hierarchy = build_hierarchy(&app).unwrap();
    let initial = init_edges(&app, &map).unwrap();
    let widened = apply_cha(&initial, &hierarchy, &app, &map);
    assert!(initial.edge_set().is_subset(&widened.edge_set()));
    let seeds = compute_entry_points(&widened, None).unwrap();
    let (narrowed, _) = apply_rta(&widened, &hierarchy, &app, &seeds, &map);
    assert!(narrowed.edge_set().is_subset(&widened.edge_set()));

    println!("ACCEPTANCE PASS: pass ordering + CHA dispatch oracle (300 programs, {with_rta} with RTA, 0 violations)");
}

/// Criterion 5: chain enumeration equals brute-force simple-path
/// enumeration on library graphs of up to 12 vertices, and truncation
/// is flagged when the limits bind.
#[test]
fn chain_completeness() {
    let mut rng = StdRng::seed_from_u64(0x5cacc0);
    let library = test_library();
    let mut total_paths = 0usize;
    let mut truncated_cases = 0usize;
    for instance in 0..300 {
        let LibraryInstance { graph, entries, sinks } = library_instance(&mut rng);
        let surface = LibrarySurface { entry_points: entries.clone() };

        // generous limits: must equal the oracle exactly
        let limits = ChainLimits::new(16, 100_000).unwrap();
        let (file, _) = enumerate_chains(&graph, &surface, &sinks, limits, &library);
        assert!(file.truncated_sinks.is_empty());
        let mut by_sink: BTreeMap<MethodRef, BTreeSet<Vec<MethodRef>>> = BTreeMap::new();
        for chain in &file.chains {
            chain.validate().unwrap();
            assert!(entries.contains(chain.entry()), "instance {instance}: chain entry not on surface");
            let mut vertices = vec![chain.edges[0].0.clone()];
            vertices.extend(chain.edges.iter().map(|(_, callee)| callee.clone()));
            by_sink.entry(chain.sink.clone()).or_default().insert(vertices);
        }
        for sink in sinks.iter().collect::<BTreeSet<_>>() {
            if !graph.contains_vertex(sink) {
                continue;
            }
            let expected = oracle_simple_paths(&graph, &entries, sink, 16);
            let actual = by_sink.remove(sink).unwrap_or_default();
            assert_eq!(actual, expected, "instance {instance}: paths to {sink} differ");
            total_paths += expected.len();

            // tight limits: emitted chains are a flagged, lexicographically
            // first subset of the oracle set
            let within_two = oracle_simple_paths(&graph, &entries, sink, 2);
            let tight = ChainLimits::new(2, 1).unwrap();
            let (capped, diags) = enumerate_chains(&graph, &surface, &[sink.clone()], tight, &library);
            if within_two.len() > 1 {
                assert_eq!(capped.truncated_sinks, vec![sink.clone()], "instance {instance}: cap not flagged");
                assert_eq!(diags.truncated_sinks, vec![sink.clone()]);
                truncated_cases += 1;
            }
            for chain in &capped.chains {
                let mut vertices = vec![chain.edges[0].0.clone()];
                vertices.extend(chain.edges.iter().map(|(_, callee)| callee.clone()));
                assert!(within_two.contains(&vertices), "instance {instance}: capped chain not in oracle set");
            }
            assert!(capped.chains.len() <= 1);
        }
    }
    assert!(truncated_cases > 0, "generator never exercised truncation");
    println!("ACCEPTANCE PASS: chain completeness (300 graphs, {total_paths} paths matched, {truncated_cases} truncations flagged)");
}

/// Criterion 6: resolution semantics. Forced fixtures, 500 randomized
/// registries against the independent oracle, and the corpus subset +
/// improvement properties.
#[test]
fn resolution_semantics() {
    // diamond: equal depth, declaration order wins
    let registry = load_registry(&read("resolution/diamond-registry.json")).unwrap();
    let manifest = load_manifest(&read("resolution/diamond-manifest.json")).unwrap();
    let resolved = resolve_maven(&manifest, &registry).unwrap();
    assert!(resolved.coordinates.contains(&Coordinate::parse("org.corp:d@2.0.0").unwrap()));

    // direct dependency beats a deeper transitive one
    let manifest = load_manifest(&read("resolution/direct-manifest.json")).unwrap();
    let resolved = resolve_maven(&manifest, &registry).unwrap();
    assert!(resolved.coordinates.contains(&Coordinate::parse("org.corp:d@1.0.0").unwrap()));
    assert_eq!(resolved.coordinates.iter().filter(|c| c.artifact == "d").count(), 1);

    // npm keeps both versions of the diamond's tip
    let registry = load_registry(&read("resolution/npm-registry.json")).unwrap();
    let manifest = load_manifest(&read("resolution/npm-manifest.json")).unwrap();
    let resolved = resolve_npm(&manifest, &registry).unwrap();
    assert!(resolved.coordinates.contains(&Coordinate::parse("org.corp:d@1.5.0").unwrap()));
    assert!(resolved.coordinates.contains(&Coordinate::parse("org.corp:d@2.3.0").unwrap()));

    // randomized registries against the wave oracle
    let mut rng = StdRng::seed_from_u64(0x5cade9);
    for instance in 0..500 {
        let (manifest, registry) = registry_instance(&mut rng);
        let resolved = resolve_maven(&manifest, &registry)
            .unwrap_or_else(|e| panic!("instance {instance}: resolution failed: {e}"));
        let oracle = oracle_maven(&manifest, &registry)
            .unwrap_or_else(|| panic!("instance {instance}: oracle failed"));

        let mut winners: BTreeMap<sca_core::PackageId, Version> = BTreeMap::new();
        for coordinate in &resolved.coordinates {
            let previous = winners.insert(coordinate.package_id(), coordinate.version.clone());
            assert!(previous.is_none(), "instance {instance}: two versions of one artifact");
        }
        let expected: BTreeMap<sca_core::PackageId, Version> =
            oracle.iter().map(|(p, (v, _, _))| (p.clone(), v.clone())).collect();
        assert_eq!(winners, expected, "instance {instance}: winner set differs from oracle");

        // the winning node carries the winning constraint at the winning depth
        for node in resolved.tree.iter().filter(|n| !n.mediated) {
            let package = node.coordinate.package_id();
            let (_, constraint, depth) = &oracle[&package];
            if resolved.tree.iter().position(|n2| !n2.mediated && n2.coordinate.package_id() == package)
                == resolved.tree.iter().position(|n2| std::ptr::eq(n2, node))
            {
                assert_eq!(&node.constraint, constraint, "instance {instance}: winning constraint");
                assert_eq!(&node.depth, depth, "instance {instance}: winning depth");
            }
        }
    }

    // corpus: declared ⊆ full resolution, and the aggregate improvement is
    // strictly positive
    let mut declared_total = 0usize;
    let mut maven_total = 0usize;
    for project in ["01", "02", "03", "04", "05", "06"] {
        let registry = load_registry(&read(&format!("resolution/corpus/{project}/registry.json"))).unwrap();
        let manifest = load_manifest(&read(&format!("resolution/corpus/{project}/manifest.json"))).unwrap();
        let declared = resolve_declared(&manifest, &registry);
        let maven = resolve_maven(&manifest, &registry).unwrap();
        let npm = resolve_npm(&manifest, &registry).unwrap();
        assert!(
            declared.coordinates.is_subset(&maven.coordinates),
            "corpus {project}: declared ⊄ maven"
        );
        assert!(
            declared.coordinates.is_subset(&npm.coordinates),
            "corpus {project}: declared ⊄ npm"
        );
        declared_total += declared.coordinates.len();
        maven_total += maven.coordinates.len();
    }
    assert!(
        maven_total > declared_total,
        "corpus shows no discovery improvement ({maven_total} vs {declared_total})"
    );
    let improvement = (maven_total as f64 - declared_total as f64) / declared_total as f64 * 100.0;

    println!("ACCEPTANCE PASS: resolution semantics (500 registries vs oracle, corpus +{improvement:.0}% discovery)");
}

/// Criterion 7: the semantic closure equals reverse reachability on
/// graphs of up to 30 vertices, and the dynamic-graph mode of the
/// upgrade fixture flags strictly fewer risky methods.
#[test]
fn remediation_closure_and_graph_modes() {
    let mut rng = StdRng::seed_from_u64(0x5ca5e0);
    let library = test_library();
    for instance in 0..500 {
        let graph = plain_graph(&mut rng, 30);
        let vertices: Vec<MethodRef> = graph.vertices().map(|(m, _)| m.clone()).collect();
        let seeds: BTreeSet<MethodRef> =
            vertices.iter().filter(|_| rng.random_bool(0.2)).cloned().collect();
        let diff = VersionDiff {
            from: library.clone(),
            to: Coordinate::new("gen", "lib", Version::new(2, 0, 0)),
            added: BTreeSet::new(),
            removed: BTreeSet::new(),
            body_changed: seeds.clone(),
        };
        let sem = semantic_closure(diff, &graph);
        let expected = oracle_reverse_reachability(&graph, &seeds);
        assert_eq!(sem.changed_closure, expected, "instance {instance}: closure differs");

        // every via-callee path actually exists in the graph and ends
        // at a seed
        for (method, reason) in &sem.reasons {
            if let sca_core::remediate::ChangeReason::ViaCallee(path) = reason {
                assert_eq!(path.first(), Some(method));
                assert!(seeds.contains(path.last().unwrap()));
                for pair in path.windows(2) {
                    assert!(graph.has_edge(&pair[0], &pair[1]), "instance {instance}: phantom path edge");
                }
            }
        }
    }

    // the committed fixture: static mode flags the infeasible dispatch
    // edge, dynamic mode does not
    let run_mode = |mode: &str, with_trace: bool| -> BTreeSet<String> {
        let mut args = vec![
            "remediate".to_string(),
            "--from".into(),
            fixture("upgrade/libcore-1.0.0.json").display().to_string(),
            "--to".into(),
            fixture("upgrade/libcore-2.0.0.json").display().to_string(),
            "--program".into(),
            fixture("upgrade/app3.json").display().to_string(),
            "--origins".into(),
            fixture("upgrade/origins3.json").display().to_string(),
            "--mode".into(),
            mode.to_string(),
        ];
        if with_trace {
            args.push("--trace".into());
            args.push(fixture("upgrade/trace3.jsonl").display().to_string());
        }
        let out = sca(&args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        report["breaking"]["risky"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["method"].as_str().unwrap().to_string())
            .collect()
    };
    let risky_static = run_mode("static-only", false);
    let risky_dynamic = run_mode("dynamic-only", true);
    let risky_combined = run_mode("combined", true);
    assert!(risky_dynamic.is_subset(&risky_static) && risky_dynamic != risky_static,
        "dynamic mode must flag strictly less: {risky_dynamic:?} vs {risky_static:?}");
    assert_eq!(risky_static, ["org.core.Api.entryB()V".to_string()].into());
    assert!(risky_dynamic.is_empty());
    assert!(risky_static.is_subset(&risky_combined));
    assert!(risky_dynamic.is_subset(&risky_combined));

    println!("ACCEPTANCE PASS: remediation closure (500 graphs vs reverse-reachability oracle) + dynamic-mode ⊊ static-mode on fixture");
}

/// Criterion 8: every subcommand is deterministic: two runs on the same
/// fixture produce byte-identical machine output.
#[test]
fn cli_determinism() {
    let chains_dir = tempfile::tempdir().unwrap();
    let chains_out = chains_dir.path().display().to_string();

    let f = |rel: &str| fixture(rel).display().to_string();
    let invocations: Vec<Vec<String>> = vec![
        vec!["resolve".into(), "--mode".into(), "declared".into(), "--manifest".into(), f("resolution/diamond-manifest.json"), "--registry".into(), f("resolution/diamond-registry.json")],
        vec!["resolve".into(), "--mode".into(), "maven".into(), "--manifest".into(), f("resolution/diamond-manifest.json"), "--registry".into(), f("resolution/diamond-registry.json"), "--compare-with".into(), "declared".into()],
        vec!["resolve".into(), "--mode".into(), "npm".into(), "--manifest".into(), f("resolution/npm-manifest.json"), "--registry".into(), f("resolution/npm-registry.json")],
        vec!["resolve".into(), "--mode".into(), "lockfile".into(), "--lockfile".into(), f("fig3/lockfile.json"), "--registry".into(), f("fig3/registry.json")],
        vec!["graph".into(), "--program".into(), f("fig3/app.json"), "--origins".into(), f("fig3/origins.json"), "--trace".into(), f("fig3/trace.jsonl"), "--chains".into(), f("fig3/chains"), "--vulndb".into(), f("fig3/vulndb.json"), "--stats".into()],
        vec!["chains".into(), "--program".into(), f("fig3/lib-u.json"), "--program".into(), f("fig3/lib-p.json"), "--vulndb".into(), f("fig3/vulndb.json"), "--out-dir".into(), chains_out.clone()],
        reach_args("fig3/trace.jsonl"),
        reach_args("fig3/trace-extended.jsonl"),
        {
            let mut args = reach_args("fig3/trace.jsonl");
            args.extend(["--format".into(), "markdown".into()]);
            args
        },
        {
            let mut args = reach_args("fig3/trace.jsonl");
            args.extend(["--merge-mode".into(), "fixpoint".into()]);
            args
        },
        vec!["reach".into(), "--program".into(), f("apns/app2.json"), "--trace".into(), f("apns/trace2.jsonl"), "--chains".into(), f("apns/chains"), "--vulndb".into(), f("apns/vulndb2.json"), "--origins".into(), f("apns/origins2.json"), "--lockfile".into(), f("apns/lockfile2.json"), "--registry".into(), f("apns/registry2.json")],
        vec!["remediate".into(), "--from".into(), f("upgrade/libcore-1.0.0.json"), "--to".into(), f("upgrade/libcore-2.0.0.json"), "--program".into(), f("upgrade/app3.json"), "--origins".into(), f("upgrade/origins3.json"), "--trace".into(), f("upgrade/trace3.jsonl"), "--mode".into(), "combined".into()],
    ];

    for args in &invocations {
        let first = sca(args);
        assert_eq!(first.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&first.stderr));
        let chain_bytes_first: Vec<Vec<u8>> = chain_files_in(chains_dir.path());
        let second = sca(args);
        assert_eq!(first.stdout, second.stdout, "nondeterministic stdout for {args:?}");
        assert_eq!(first.status.code(), second.status.code());
        let chain_bytes_second: Vec<Vec<u8>> = chain_files_in(chains_dir.path());
        assert_eq!(chain_bytes_first, chain_bytes_second, "chain files drifted for {args:?}");
    }

    println!("ACCEPTANCE PASS: determinism ({} invocations, byte-identical reruns)", invocations.len());
}

fn chain_files_in(dir: &std::path::Path) -> Vec<Vec<u8>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    paths.sort();
    paths.into_iter().map(|p| std::fs::read(p).unwrap()).collect()
}

/// Criterion 9: adding a trace never reduces the reachable-sink set,
/// and on the fixture modeled after the project where dynamic analysis
/// discovers sinks static analysis misses, the dynamic sink set is a
/// strict superset.
#[test]
fn union_monotonicity_and_dynamic_superset() {
    let reachable_ids = |args: &[String]| -> BTreeSet<String> {
        let out = sca(args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        report["findings"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|finding| finding["status"] == "reachable")
            .map(|finding| finding["vuln_id"].as_str().unwrap().to_string())
            .collect()
    };

    // fig3: no trace ⊆ base trace ⊆ extended trace
    let f = |rel: &str| fixture(rel).display().to_string();
    let without_trace: Vec<String> = vec![
        "reach".into(), "--program".into(), f("fig3/app.json"),
        "--chains".into(), f("fig3/chains"),
        "--vulndb".into(), f("fig3/vulndb.json"),
        "--origins".into(), f("fig3/origins.json"),
    ];
    let no_trace = reachable_ids(&without_trace);
    let base = reachable_ids(&reach_args("fig3/trace.jsonl"));
    let extended = reachable_ids(&reach_args("fig3/trace-extended.jsonl"));
    assert!(no_trace.is_subset(&base), "adding a trace removed findings");
    assert!(base.is_subset(&extended), "extending the trace removed findings");
    assert!(extended.contains("VULN-0002") && !base.contains("VULN-0002"));

    // apns-shaped fixture: dynamic sinks ⊋ static sinks
    let apns: Vec<String> = vec![
        "reach".into(), "--program".into(), f("apns/app2.json"),
        "--trace".into(), f("apns/trace2.jsonl"),
        "--chains".into(), f("apns/chains"),
        "--vulndb".into(), f("apns/vulndb2.json"),
        "--origins".into(), f("apns/origins2.json"),
        "--lockfile".into(), f("apns/lockfile2.json"),
        "--registry".into(), f("apns/registry2.json"),
    ];
    let out = sca(&apns);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let static_sinks = report["graph_stats"]["static_sinks"].as_u64().unwrap();
    let dynamic_sinks = report["graph_stats"]["dynamic_sinks"].as_u64().unwrap();
    assert!(
        dynamic_sinks > static_sinks,
        "dynamic must discover strictly more sinks ({dynamic_sinks} vs {static_sinks})"
    );

    // and the same comparison as reachable-set inclusion via graph modes
    let mut static_args = apns.clone();
    static_args.extend(["--graph-mode".into(), "static-only".into()]);
    let static_set = reachable_ids(&static_args);
    let combined_set = reachable_ids(&apns);
    assert!(static_set.is_subset(&combined_set) && static_set != combined_set);

    println!("ACCEPTANCE PASS: union monotonicity + dynamic sinks ⊋ static sinks ({dynamic_sinks} > {static_sinks})");
}

/// Entry-point check shared by several criteria: the projection roots
/// and the static entry points stay first-party through composition.
#[test]
fn composed_entry_points_stay_first_party() {
    let map = fig3_origin_map();
    let app = load_program(&read("fig3/app.json")).unwrap();
    let build = build_static(&app, &map, &StaticConfig::default()).unwrap();
    let dynamic = build_dynamic(&[load_trace(&read("fig3/trace.jsonl")).unwrap()], &map);
    let eps: EntryPointSet = build.entry_points.merged(&dynamic.roots);
    let combined = union(&build.graph, &dynamic.graph);
    for root in eps.iter() {
        assert!(combined.origin_of(root).unwrap().is_first_party(), "{root} is not first-party");
    }
}
