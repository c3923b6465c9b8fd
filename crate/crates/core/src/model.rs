//! Core domain types shared by every analysis stage: method references,
//! origins, library coordinates, call graphs, and call chains.
//!
//! All types are immutable values after construction. Analysis passes
//! take graphs by reference and return new graphs, which keeps the
//! stages of the pipeline independently checkable.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Parameter/return shape of a method. The two components are opaque
/// strings compared byte-wise; canonical text form is `(params)ret`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Descriptor {
    pub params: String,
    pub ret: String,
}

impl Descriptor {
    pub fn new(params: impl Into<String>, ret: impl Into<String>) -> Self {
        Descriptor { params: params.into(), ret: ret.into() }
    }

    /// Parses the `(params)ret` text form.
    pub fn parse(text: &str) -> Result<Self, RefParseError> {
        if !text.starts_with('(') {
            return Err(RefParseError::MissingDescriptor { text: text.to_string() });
        }
        let close = text
            .find(')')
            .ok_or_else(|| RefParseError::UnterminatedDescriptor { text: text.to_string(), at: 0 })?;
        if text[1..close].contains('(') {
            return Err(RefParseError::MissingDescriptor { text: text.to_string() });
        }
        Ok(Descriptor { params: text[1..close].to_string(), ret: text[close + 1..].to_string() })
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}){}", self.params, self.ret)
    }
}

impl Serialize for Descriptor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Descriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = Cow::<str>::deserialize(d)?;
        Descriptor::parse(&text).map_err(D::Error::custom)
    }
}

/// Canonical identity of a method: qualified class name, method name,
/// and descriptor. Identity is purely textual so that graphs from
/// different sources (static passes, traces, chain files) merge by
/// exact key.
///
/// Canonical text form: `class.method(params)ret`, e.g.
/// `com.app.Foo.bar(I)V`. Parsing and formatting round-trip byte-exactly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodRef {
    pub class_name: String,
    pub method_name: String,
    pub descriptor: Descriptor,
}

impl MethodRef {
    /// Builds a reference from trusted parts. Callers must uphold the
    /// grammar (non-empty class and method, no parentheses in either,
    /// no `.` in the method name); use [`MethodRef::parse`] for
    /// untrusted text.
    pub fn new(class_name: impl Into<String>, method_name: impl Into<String>, descriptor: Descriptor) -> Self {
        MethodRef { class_name: class_name.into(), method_name: method_name.into(), descriptor }
    }

    /// Parses the canonical `class.method(params)ret` form, reporting
    /// the offending byte span on failure.
    pub fn parse(text: &str) -> Result<Self, RefParseError> {
        if text.is_empty() {
            return Err(RefParseError::Empty);
        }
        let open = text
            .find('(')
            .ok_or_else(|| RefParseError::MissingDescriptor { text: text.to_string() })?;
        let prefix = &text[..open];
        let dot = prefix.rfind('.').ok_or_else(|| RefParseError::EmptyClass {
            text: text.to_string(),
            start: 0,
            end: open,
        })?;
        let class_name = &prefix[..dot];
        let method_name = &prefix[dot + 1..];
        if class_name.is_empty() {
            return Err(RefParseError::EmptyClass { text: text.to_string(), start: 0, end: dot });
        }
        if method_name.is_empty() {
            return Err(RefParseError::EmptyMethod {
                text: text.to_string(),
                start: dot + 1,
                end: open,
            });
        }
        let close = text[open..]
            .find(')')
            .map(|rel| open + rel)
            .ok_or_else(|| RefParseError::UnterminatedDescriptor { text: text.to_string(), at: open })?;
        Ok(MethodRef {
            class_name: class_name.to_string(),
            method_name: method_name.to_string(),
            descriptor: Descriptor {
                params: text[open + 1..close].to_string(),
                ret: text[close + 1..].to_string(),
            },
        })
    }

    /// The canonical text form, identical across every file format.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    pub fn signature(&self) -> (&str, &Descriptor) {
        (&self.method_name, &self.descriptor)
    }
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}{}", self.class_name, self.method_name, self.descriptor)
    }
}

impl FromStr for MethodRef {
    type Err = RefParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MethodRef::parse(s)
    }
}

impl Serialize for MethodRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MethodRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = Cow::<str>::deserialize(d)?;
        MethodRef::parse(&text).map_err(D::Error::custom)
    }
}

/// Error raised when canonical method-reference text does not match the
/// `class.method(params)ret` grammar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefParseError {
    #[error("empty method reference")]
    Empty,
    #[error("missing descriptor (no `(...)`) in `{text}`")]
    MissingDescriptor { text: String },
    #[error("unterminated descriptor starting at byte {at} in `{text}`")]
    UnterminatedDescriptor { text: String, at: usize },
    #[error("empty class name at bytes {start}..{end} in `{text}`")]
    EmptyClass { text: String, start: usize, end: usize },
    #[error("empty method name at bytes {start}..{end} in `{text}`")]
    EmptyMethod { text: String, start: usize, end: usize },
}

/// A semantic version: three numeric components plus an optional
/// qualifier. Ordering compares the numeric components first, then the
/// qualifier byte-wise; a qualified version sorts before the bare
/// version with the same numbers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
    pub qualifier: Option<String>,
}

impl Version {
    pub fn new(major: u64, minor: u64, patch: u64) -> Self {
        Version { major, minor, patch, qualifier: None }
    }

    pub fn with_qualifier(major: u64, minor: u64, patch: u64, qualifier: impl Into<String>) -> Self {
        Version { major, minor, patch, qualifier: Some(qualifier.into()) }
    }

    pub fn parse(text: &str) -> Result<Self, CoordParseError> {
        let err = |reason: &str| CoordParseError::Version { text: text.to_string(), reason: reason.to_string() };
        let (nums, qualifier) = match text.find('-') {
            Some(i) => (&text[..i], Some(text[i + 1..].to_string())),
            None => (text, None),
        };
        if let Some(q) = &qualifier {
            if q.is_empty() {
                return Err(err("empty qualifier"));
            }
        }
        let mut parts = nums.split('.');
        let mut next_num = |name: &str| -> Result<u64, CoordParseError> {
            parts
                .next()
                .ok_or_else(|| err(&format!("missing {name} component")))?
                .parse::<u64>()
                .map_err(|_| err(&format!("non-numeric {name} component")))
        };
        let major = next_num("major")?;
        let minor = next_num("minor")?;
        let patch = next_num("patch")?;
        if parts.next().is_some() {
            return Err(err("more than three numeric components"));
        }
        Ok(Version { major, minor, patch, qualifier })
    }
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.major, self.minor, self.patch)
            .cmp(&(other.major, other.minor, other.patch))
            .then_with(|| match (&self.qualifier, &other.qualifier) {
                (None, None) => Ordering::Equal,
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (Some(a), Some(b)) => a.as_bytes().cmp(b.as_bytes()),
            })
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)?;
        if let Some(q) = &self.qualifier {
            write!(f, "-{q}")?;
        }
        Ok(())
    }
}

impl FromStr for Version {
    type Err = CoordParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Version::parse(s)
    }
}

impl Serialize for Version {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Version {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = Cow::<str>::deserialize(d)?;
        Version::parse(&text).map_err(D::Error::custom)
    }
}

/// A (group, artifact) pair naming a package independent of version.
/// Text form `group:artifact`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackageId {
    pub group: String,
    pub artifact: String,
}

impl PackageId {
    pub fn new(group: impl Into<String>, artifact: impl Into<String>) -> Self {
        PackageId { group: group.into(), artifact: artifact.into() }
    }

    pub fn parse(text: &str) -> Result<Self, CoordParseError> {
        let err = |reason: &str| CoordParseError::Package { text: text.to_string(), reason: reason.to_string() };
        let (group, artifact) = text.split_once(':').ok_or_else(|| err("missing `:` separator"))?;
        if group.is_empty() {
            return Err(err("empty group"));
        }
        if artifact.is_empty() || artifact.contains(':') {
            return Err(err("bad artifact"));
        }
        Ok(PackageId::new(group, artifact))
    }

    pub fn at(&self, version: Version) -> Coordinate {
        Coordinate { group: self.group.clone(), artifact: self.artifact.clone(), version }
    }
}

impl fmt::Display for PackageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.group, self.artifact)
    }
}

impl FromStr for PackageId {
    type Err = CoordParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PackageId::parse(s)
    }
}

impl Serialize for PackageId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PackageId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = Cow::<str>::deserialize(d)?;
        PackageId::parse(&text).map_err(D::Error::custom)
    }
}

/// One library version: group, artifact, and semantic version. Text
/// form `group:artifact@version`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coordinate {
    pub group: String,
    pub artifact: String,
    pub version: Version,
}

impl Coordinate {
    pub fn new(group: impl Into<String>, artifact: impl Into<String>, version: Version) -> Self {
        Coordinate { group: group.into(), artifact: artifact.into(), version }
    }

    pub fn parse(text: &str) -> Result<Self, CoordParseError> {
        let err = |reason: &str| CoordParseError::Coordinate { text: text.to_string(), reason: reason.to_string() };
        let (id, version) = text.split_once('@').ok_or_else(|| err("missing `@` separator"))?;
        let id = PackageId::parse(id)?;
        Ok(id.at(Version::parse(version)?))
    }

    pub fn package_id(&self) -> PackageId {
        PackageId::new(self.group.clone(), self.artifact.clone())
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}@{}", self.group, self.artifact, self.version)
    }
}

impl FromStr for Coordinate {
    type Err = CoordParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Coordinate::parse(s)
    }
}

impl Serialize for Coordinate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Coordinate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = Cow::<str>::deserialize(d)?;
        Coordinate::parse(&text).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoordParseError {
    #[error("invalid version `{text}`: {reason}")]
    Version { text: String, reason: String },
    #[error("invalid package id `{text}`: {reason}")]
    Package { text: String, reason: String },
    #[error("invalid coordinate `{text}`: {reason}")]
    Coordinate { text: String, reason: String },
}

/// Where a method comes from: the application itself, a library
/// identified by coordinate, or a test/application framework identified
/// by its namespace prefix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    FirstParty,
    ThirdParty(Coordinate),
    Framework(String),
}

impl Origin {
    pub fn is_first_party(&self) -> bool {
        matches!(self, Origin::FirstParty)
    }

    pub fn is_framework(&self) -> bool {
        matches!(self, Origin::Framework(_))
    }
}

/// One namespace-prefix rule of an [`OriginMap`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginRule {
    pub prefix: String,
    pub origin: Origin,
}

/// Ordered prefix rules classifying class names into origins. The first
/// matching prefix wins; anything unmatched is first-party.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginMap {
    pub rules: Vec<OriginRule>,
}

impl OriginMap {
    pub fn new(rules: Vec<OriginRule>) -> Self {
        OriginMap { rules }
    }

    pub fn push_rule(&mut self, prefix: impl Into<String>, origin: Origin) {
        self.rules.push(OriginRule { prefix: prefix.into(), origin });
    }

    /// Classifies a method by the first rule whose prefix matches its
    /// class name. Total: unmatched refs are first-party.
    pub fn classify(&self, method: &MethodRef) -> Origin {
        for rule in &self.rules {
            if method.class_name.starts_with(&rule.prefix) {
                return rule.origin.clone();
            }
        }
        Origin::FirstParty
    }
}

/// How a call edge was discovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Static,
    Dynamic,
    Chain,
}

/// A directed call edge tagged with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub caller: MethodRef,
    pub callee: MethodRef,
    pub provenance: Provenance,
}

/// A directed call graph: a set of (method, origin) vertices and a set
/// of provenance-tagged edges whose endpoints are always vertices.
///
/// Deterministic by construction: vertices and adjacency are ordered
/// maps, so iteration order never depends on insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    vertices: BTreeMap<MethodRef, Origin>,
    out: BTreeMap<MethodRef, BTreeSet<(MethodRef, Provenance)>>,
    incoming: BTreeMap<MethodRef, BTreeSet<(MethodRef, Provenance)>>,
}

impl CallGraph {
    pub fn new() -> Self {
        CallGraph::default()
    }

    /// Adds a vertex. The first insertion of a method wins; an existing
    /// origin is never overwritten.
    pub fn add_vertex(&mut self, method: MethodRef, origin: Origin) {
        self.vertices.entry(method).or_insert(origin);
    }

    /// Adds an edge between two existing vertices. Returns false if the
    /// identical (caller, callee, provenance) triple was already present.
    ///
    /// Panics if either endpoint is missing; callers add vertices first
    /// (or use [`CallGraph::add_edge_with`]).
    pub fn add_edge(&mut self, caller: MethodRef, callee: MethodRef, provenance: Provenance) -> bool {
        assert!(self.vertices.contains_key(&caller), "edge caller {caller} is not a vertex");
        assert!(self.vertices.contains_key(&callee), "edge callee {callee} is not a vertex");
        let fresh = self
            .out
            .entry(caller.clone())
            .or_default()
            .insert((callee.clone(), provenance));
        self.incoming.entry(callee).or_default().insert((caller, provenance));
        fresh
    }

    /// Adds both endpoints (first-wins origins) and the edge in one step.
    pub fn add_edge_with(
        &mut self,
        caller: (MethodRef, Origin),
        callee: (MethodRef, Origin),
        provenance: Provenance,
    ) -> bool {
        self.add_vertex(caller.0.clone(), caller.1);
        self.add_vertex(callee.0.clone(), callee.1);
        self.add_edge(caller.0, callee.0, provenance)
    }

    pub fn contains_vertex(&self, method: &MethodRef) -> bool {
        self.vertices.contains_key(method)
    }

    pub fn origin_of(&self, method: &MethodRef) -> Option<&Origin> {
        self.vertices.get(method)
    }

    pub fn vertices(&self) -> impl Iterator<Item = (&MethodRef, &Origin)> {
        self.vertices.iter()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(BTreeSet::len).sum()
    }

    /// All edges in deterministic (caller, callee, provenance) order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.out.iter().flat_map(|(caller, outs)| {
            outs.iter().map(move |(callee, provenance)| Edge {
                caller: caller.clone(),
                callee: callee.clone(),
                provenance: *provenance,
            })
        })
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges().collect()
    }

    pub fn out_edges(&self, method: &MethodRef) -> impl Iterator<Item = &(MethodRef, Provenance)> {
        self.out.get(method).into_iter().flatten()
    }

    /// Distinct successor methods, ignoring provenance.
    pub fn successors(&self, method: &MethodRef) -> BTreeSet<&MethodRef> {
        self.out_edges(method).map(|(callee, _)| callee).collect()
    }

    pub fn predecessors(&self, method: &MethodRef) -> BTreeSet<&MethodRef> {
        self.incoming.get(method).into_iter().flatten().map(|(caller, _)| caller).collect()
    }

    pub fn in_degree(&self, method: &MethodRef) -> usize {
        self.incoming.get(method).map_or(0, BTreeSet::len)
    }

    pub fn has_edge(&self, caller: &MethodRef, callee: &MethodRef) -> bool {
        self.out_edges(caller).any(|(c, _)| c == callee)
    }

    /// Provenances carried by edges between one caller/callee pair.
    pub fn provenances(&self, caller: &MethodRef, callee: &MethodRef) -> BTreeSet<Provenance> {
        self.out_edges(caller)
            .filter(|(c, _)| c == callee)
            .map(|(_, p)| *p)
            .collect()
    }

    /// Vertices with no incoming edges, in canonical order.
    pub fn zero_in_degree(&self) -> impl Iterator<Item = &MethodRef> {
        self.vertices.keys().filter(|m| self.in_degree(m) == 0)
    }

    /// Every vertex reachable from the given roots, roots included
    /// (when present in the graph).
    pub fn reachable_from<'a, I>(&self, roots: I) -> BTreeSet<MethodRef>
    where
        I: IntoIterator<Item = &'a MethodRef>,
    {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<MethodRef> = roots
            .into_iter()
            .filter(|r| self.contains_vertex(r))
            .cloned()
            .collect();
        for r in &queue {
            seen.insert(r.clone());
        }
        while let Some(m) = queue.pop_front() {
            for (callee, _) in self.out_edges(&m) {
                if seen.insert(callee.clone()) {
                    queue.push_back(callee.clone());
                }
            }
        }
        seen
    }

    /// The subgraph induced by vertices reachable from the roots: every
    /// reachable vertex plus every edge whose caller is reachable.
    pub fn prune_unreachable<'a, I>(&self, roots: I) -> CallGraph
    where
        I: IntoIterator<Item = &'a MethodRef>,
    {
        let keep = self.reachable_from(roots);
        let mut pruned = CallGraph::new();
        for m in &keep {
            pruned.add_vertex(m.clone(), self.vertices[m].clone());
        }
        for m in &keep {
            for (callee, prov) in self.out_edges(m) {
                pruned.add_edge(m.clone(), callee.clone(), *prov);
            }
        }
        pruned
    }

    /// A copy keeping only edges whose provenance is in `keep`. All
    /// vertices are retained; prune separately if needed.
    pub fn filter_provenance(&self, keep: &[Provenance]) -> CallGraph {
        let mut filtered = CallGraph::new();
        for (m, o) in &self.vertices {
            filtered.add_vertex(m.clone(), o.clone());
        }
        for e in self.edges() {
            if keep.contains(&e.provenance) {
                filtered.add_edge(e.caller, e.callee, e.provenance);
            }
        }
        filtered
    }

    /// Copies every vertex and edge of `other` into `self`. Vertex
    /// origins keep the first value seen, so `self` wins on conflicts.
    pub fn absorb(&mut self, other: &CallGraph) {
        for (m, o) in other.vertices() {
            self.add_vertex(m.clone(), o.clone());
        }
        for e in other.edges() {
            self.add_edge(e.caller, e.callee, e.provenance);
        }
    }

    /// Checks the edge-endpoint closure invariant. The adjacency maps
    /// make violations unrepresentable through the public API; this is
    /// the belt-and-braces check used by tests.
    pub fn validate(&self) -> Result<(), GraphInvariantError> {
        for e in self.edges() {
            if !self.contains_vertex(&e.caller) {
                return Err(GraphInvariantError::DanglingEndpoint(e.caller.clone()));
            }
            if !self.contains_vertex(&e.callee) {
                return Err(GraphInvariantError::DanglingEndpoint(e.callee.clone()));
            }
        }
        for (callee, ins) in &self.incoming {
            for (caller, prov) in ins {
                let ok = self
                    .out
                    .get(caller)
                    .is_some_and(|outs| outs.contains(&(callee.clone(), *prov)));
                if !ok {
                    return Err(GraphInvariantError::IndexMismatch(caller.clone(), callee.clone()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphInvariantError {
    #[error("edge endpoint {0} is not a vertex")]
    DanglingEndpoint(MethodRef),
    #[error("incoming index out of sync for edge {0} -> {1}")]
    IndexMismatch(MethodRef, MethodRef),
}

/// An ordered sequence of call edges inside one library, ending at a
/// vulnerability-specific sink. Consecutive edges share a vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CallChain {
    pub edges: Vec<(MethodRef, MethodRef)>,
    pub sink: MethodRef,
    pub library: Coordinate,
}

impl CallChain {
    pub fn new(edges: Vec<(MethodRef, MethodRef)>, sink: MethodRef, library: Coordinate) -> Self {
        CallChain { edges, sink, library }
    }

    pub fn validate(&self) -> Result<(), ChainInvariantError> {
        if self.edges.is_empty() {
            return Err(ChainInvariantError::Empty);
        }
        for (i, window) in self.edges.windows(2).enumerate() {
            if window[0].1 != window[1].0 {
                return Err(ChainInvariantError::Gap { index: i + 1 });
            }
        }
        let last = &self.edges[self.edges.len() - 1].1;
        if *last != self.sink {
            return Err(ChainInvariantError::SinkMismatch {
                expected: self.sink.clone(),
                found: last.clone(),
            });
        }
        Ok(())
    }

    /// Entry point of the chain: the caller of the first edge.
    pub fn entry(&self) -> &MethodRef {
        &self.edges[0].0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainInvariantError {
    #[error("chain has no edges")]
    Empty,
    #[error("edge {index} does not start at the previous callee")]
    Gap { index: usize },
    #[error("chain ends at {found}, expected sink {expected}")]
    SinkMismatch { expected: MethodRef, found: MethodRef },
}

/// First-party methods that root reachability: methods without callers
/// in the graph they were computed from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntryPointSet {
    methods: BTreeSet<MethodRef>,
}

impl EntryPointSet {
    pub fn new(methods: BTreeSet<MethodRef>) -> Self {
        EntryPointSet { methods }
    }

    pub fn contains(&self, method: &MethodRef) -> bool {
        self.methods.contains(method)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MethodRef> {
        self.methods.iter()
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn as_set(&self) -> &BTreeSet<MethodRef> {
        &self.methods
    }

    /// Set union, used when a combined graph draws roots from both the
    /// static and the dynamic pipeline.
    pub fn merged(&self, other: &EntryPointSet) -> EntryPointSet {
        EntryPointSet::new(self.methods.union(&other.methods).cloned().collect())
    }
}

impl FromIterator<MethodRef> for EntryPointSet {
    fn from_iter<T: IntoIterator<Item = MethodRef>>(iter: T) -> Self {
        EntryPointSet::new(iter.into_iter().collect())
    }
}
