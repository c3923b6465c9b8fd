//! Dependency discovery: declared-only analysis, full resolution under
//! Maven-style (single version, nearest definition) and npm-style
//! (multi-version) semantics, lockfile replay, and comparison metrics.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::formats::{LockfileDocument, ManifestDocument, RegistryDocument};
use crate::model::{Coordinate, CoordParseError, PackageId, Version};

/// A version constraint. Caret and tilde are sugar that expands to
/// canonical bound ranges: `^x.y.z` keeps the major, `~x.y.z` keeps the
/// major and minor.
///
/// Text forms: `=1.2.3` (or bare `1.2.3`), `^1.2.3`, `~1.2.3`, and
/// comma-separated bound lists such as `>=1.0.0,<2.0.0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    Exact(Version),
    Caret(Version),
    Tilde(Version),
    Range(Vec<(BoundOp, Version)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundOp {
    Ge,
    Gt,
    Le,
    Lt,
}

impl BoundOp {
    fn holds(self, candidate: &Version, bound: &Version) -> bool {
        match self {
            BoundOp::Ge => candidate >= bound,
            BoundOp::Gt => candidate > bound,
            BoundOp::Le => candidate <= bound,
            BoundOp::Lt => candidate < bound,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BoundOp::Ge => ">=",
            BoundOp::Gt => ">",
            BoundOp::Le => "<=",
            BoundOp::Lt => "<",
        }
    }
}

impl Constraint {
    pub fn parse(text: &str) -> Result<Self, ConstraintParseError> {
        let err = |reason: &str| ConstraintParseError {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(err("empty constraint"));
        }
        if let Some(rest) = trimmed.strip_prefix('^') {
            return Ok(Constraint::Caret(Version::parse(rest).map_err(|e| err(&e.to_string()))?));
        }
        if let Some(rest) = trimmed.strip_prefix('~') {
            return Ok(Constraint::Tilde(Version::parse(rest).map_err(|e| err(&e.to_string()))?));
        }
        if let Some(rest) = trimmed.strip_prefix('=') {
            return Ok(Constraint::Exact(Version::parse(rest).map_err(|e| err(&e.to_string()))?));
        }
        if trimmed.starts_with(|c: char| c.is_ascii_digit()) {
            return Ok(Constraint::Exact(Version::parse(trimmed).map_err(|e| err(&e.to_string()))?));
        }
        let mut bounds = Vec::new();
        for term in trimmed.split(',').map(str::trim) {
            let (op, rest) = if let Some(r) = term.strip_prefix(">=") {
                (BoundOp::Ge, r)
            } else if let Some(r) = term.strip_prefix("<=") {
                (BoundOp::Le, r)
            } else if let Some(r) = term.strip_prefix('>') {
                (BoundOp::Gt, r)
            } else if let Some(r) = term.strip_prefix('<') {
                (BoundOp::Lt, r)
            } else {
                return Err(err(&format!("unrecognized term `{term}`")));
            };
            bounds.push((op, Version::parse(rest.trim()).map_err(|e| err(&e.to_string()))?));
        }
        Ok(Constraint::Range(bounds))
    }

    /// The canonical bound-range form. Exact becomes a two-sided closed
    /// range; caret and tilde expand to half-open ranges on the next
    /// major/minor.
    pub fn to_bounds(&self) -> Vec<(BoundOp, Version)> {
        match self {
            Constraint::Exact(v) => vec![(BoundOp::Ge, v.clone()), (BoundOp::Le, v.clone())],
            Constraint::Caret(v) => vec![
                (BoundOp::Ge, v.clone()),
                (BoundOp::Lt, Version::new(v.major + 1, 0, 0)),
            ],
            Constraint::Tilde(v) => vec![
                (BoundOp::Ge, v.clone()),
                (BoundOp::Lt, Version::new(v.major, v.minor + 1, 0)),
            ],
            Constraint::Range(bounds) => bounds.clone(),
        }
    }

    /// Total, decidable satisfaction: every canonical bound must hold.
    pub fn satisfies(&self, candidate: &Version) -> bool {
        self.to_bounds().iter().all(|(op, bound)| op.holds(candidate, bound))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Exact(v) => write!(f, "={v}"),
            Constraint::Caret(v) => write!(f, "^{v}"),
            Constraint::Tilde(v) => write!(f, "~{v}"),
            Constraint::Range(bounds) => {
                let terms: Vec<String> =
                    bounds.iter().map(|(op, v)| format!("{}{v}", op.symbol())).collect();
                write!(f, "{}", terms.join(","))
            }
        }
    }
}

impl FromStr for Constraint {
    type Err = ConstraintParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Constraint::parse(s)
    }
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Constraint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = Cow::<str>::deserialize(d)?;
        Constraint::parse(&text).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid constraint `{text}`: {reason}")]
pub struct ConstraintParseError {
    pub text: String,
    pub reason: String,
}

/// Which resolution semantics produced a [`ResolutionResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolutionMode {
    Declared,
    Maven,
    Npm,
    Lockfile,
}

impl fmt::Display for ResolutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ResolutionMode::Declared => "declared",
            ResolutionMode::Maven => "maven",
            ResolutionMode::Npm => "npm",
            ResolutionMode::Lockfile => "lockfile",
        };
        f.write_str(s)
    }
}

/// One node of the resolved dependency tree. `parent` indexes into the
/// tree vector; `mediated` marks occurrences whose declared constraint
/// lost a Maven conflict and were pinned to the winning version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub coordinate: Coordinate,
    pub parent: Option<usize>,
    pub depth: usize,
    pub constraint: Constraint,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub mediated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionDiagnostics {
    pub conflicts_mediated: Vec<String>,
    pub constraints_unsatisfied: Vec<String>,
    pub entries_skipped: Vec<String>,
}

/// The outcome of one resolution mode: the coordinate set, the tree it
/// was drawn from, and diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionResult {
    pub mode: ResolutionMode,
    pub coordinates: BTreeSet<Coordinate>,
    pub tree: Vec<TreeNode>,
    pub diagnostics: ResolutionDiagnostics,
}

impl ResolutionResult {
    fn new(mode: ResolutionMode) -> Self {
        ResolutionResult {
            mode,
            coordinates: BTreeSet::new(),
            tree: Vec::new(),
            diagnostics: ResolutionDiagnostics::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("unknown package `{package}` (required via {})", path.join(" -> "))]
    UnknownPackage { package: PackageId, path: Vec<String> },
    #[error("no version of `{package}` satisfies `{constraint}` (required via {})", path.join(" -> "))]
    NoSatisfyingVersion { package: PackageId, constraint: Constraint, path: Vec<String> },
    #[error("lockfile coordinate `{0}` is missing from the registry snapshot")]
    StaleLockfile(Coordinate),
    #[error(transparent)]
    Coordinate(#[from] CoordParseError),
}

/// Highest registry version of `package` satisfying `constraint`.
fn max_satisfying<'r>(
    registry: &'r RegistryDocument,
    package: &PackageId,
    constraint: &Constraint,
) -> Option<Option<&'r Version>> {
    let versions = registry.packages.get(package)?;
    Some(versions.keys().rev().find(|v| constraint.satisfies(v)))
}

/// Direct dependencies only, each pinned to the maximum satisfying
/// registry version. No transitive traversal: this is the purely
/// static baseline. Unknown packages and unsatisfiable constraints are
/// per-entry diagnostics, not errors.
pub fn resolve_declared(
    manifest: &ManifestDocument,
    registry: &RegistryDocument,
) -> ResolutionResult {
    let mut result = ResolutionResult::new(ResolutionMode::Declared);
    for dep in &manifest.dependencies {
        match max_satisfying(registry, &dep.package, &dep.constraint) {
            None => result
                .diagnostics
                .entries_skipped
                .push(format!("{}: not in registry", dep.package)),
            Some(None) => result
                .diagnostics
                .entries_skipped
                .push(format!("{}: no version satisfies `{}`", dep.package, dep.constraint)),
            Some(Some(version)) => {
                let coordinate = dep.package.at(version.clone());
                result.tree.push(TreeNode {
                    coordinate: coordinate.clone(),
                    parent: None,
                    depth: 1,
                    constraint: dep.constraint.clone(),
                    mediated: false,
                });
                result.coordinates.insert(coordinate);
            }
        }
    }
    result
}

/// Full resolution under Maven semantics: breadth-first traversal in
/// declaration order; the first version of each (group, artifact)
/// encountered wins (nearest definition); later occurrences are pinned
/// to the winner and their subtrees draw from the winner's dependency
/// list, which is expanded exactly once.
pub fn resolve_maven(
    manifest: &ManifestDocument,
    registry: &RegistryDocument,
) -> Result<ResolutionResult, ResolveError> {
    let mut result = ResolutionResult::new(ResolutionMode::Maven);
    let mut winners: BTreeMap<PackageId, Version> = BTreeMap::new();
    let mut expanded: BTreeSet<PackageId> = BTreeSet::new();

    struct Item {
        package: PackageId,
        constraint: Constraint,
        parent: Option<usize>,
        depth: usize,
        path: Vec<String>,
    }
    let mut queue: VecDeque<Item> = manifest
        .dependencies
        .iter()
        .map(|dep| Item {
            package: dep.package.clone(),
            constraint: dep.constraint.clone(),
            parent: None,
            depth: 1,
            path: vec!["root".to_string()],
        })
        .collect();

    while let Some(item) = queue.pop_front() {
        let mut mediated = false;
        let version = match winners.get(&item.package) {
            Some(winner) => {
                mediated = true;
                result.diagnostics.conflicts_mediated.push(format!(
                    "{}: `{}` at depth {} lost to {}",
                    item.package, item.constraint, item.depth, winner
                ));
                if !item.constraint.satisfies(winner) {
                    result.diagnostics.constraints_unsatisfied.push(format!(
                        "{}: mediated version {} does not satisfy `{}`",
                        item.package, winner, item.constraint
                    ));
                }
                winner.clone()
            }
            None => {
                let version = max_satisfying(registry, &item.package, &item.constraint)
                    .ok_or_else(|| ResolveError::UnknownPackage {
                        package: item.package.clone(),
                        path: item.path.clone(),
                    })?
                    .ok_or_else(|| ResolveError::NoSatisfyingVersion {
                        package: item.package.clone(),
                        constraint: item.constraint.clone(),
                        path: item.path.clone(),
                    })?
                    .clone();
                winners.insert(item.package.clone(), version.clone());
                version
            }
        };

        let coordinate = item.package.at(version.clone());
        result.coordinates.insert(coordinate.clone());
        let node_index = result.tree.len();
        result.tree.push(TreeNode {
            coordinate: coordinate.clone(),
            parent: item.parent,
            depth: item.depth,
            constraint: item.constraint.clone(),
            mediated,
        });

        if expanded.insert(item.package.clone()) {
            let mut path = item.path.clone();
            path.push(coordinate.to_string());
            for dep in &registry.packages[&item.package][&version] {
                queue.push_back(Item {
                    package: dep.package.clone(),
                    constraint: dep.constraint.clone(),
                    parent: Some(node_index),
                    depth: item.depth + 1,
                    path: path.clone(),
                });
            }
        }
    }
    Ok(result)
}

/// Full resolution under npm semantics: each constraint resolves
/// independently to the maximum satisfying version, recursively, so the
/// tree may hold several versions of one artifact. Cycles are broken by
/// in-path memoization: a coordinate already on the current path is not
/// re-expanded.
pub fn resolve_npm(
    manifest: &ManifestDocument,
    registry: &RegistryDocument,
) -> Result<ResolutionResult, ResolveError> {
    let mut result = ResolutionResult::new(ResolutionMode::Npm);

    fn visit(
        registry: &RegistryDocument,
        package: &PackageId,
        constraint: &Constraint,
        parent: Option<usize>,
        depth: usize,
        path: &mut Vec<Coordinate>,
        names: &mut Vec<String>,
        result: &mut ResolutionResult,
    ) -> Result<(), ResolveError> {
        let version = max_satisfying(registry, package, constraint)
            .ok_or_else(|| ResolveError::UnknownPackage {
                package: package.clone(),
                path: names.clone(),
            })?
            .ok_or_else(|| ResolveError::NoSatisfyingVersion {
                package: package.clone(),
                constraint: constraint.clone(),
                path: names.clone(),
            })?
            .clone();
        let coordinate = package.at(version.clone());
        let node_index = result.tree.len();
        result.tree.push(TreeNode {
            coordinate: coordinate.clone(),
            parent,
            depth,
            constraint: constraint.clone(),
            mediated: false,
        });
        result.coordinates.insert(coordinate.clone());
        if path.contains(&coordinate) {
            return Ok(()); // cycle: already on this path
        }
        path.push(coordinate.clone());
        names.push(coordinate.to_string());
        for dep in &registry.packages[package][&version] {
            visit(registry, &dep.package, &dep.constraint, Some(node_index), depth + 1, path, names, result)?;
        }
        names.pop();
        path.pop();
        Ok(())
    }

    let mut path = Vec::new();
    let mut names = vec!["root".to_string()];
    for dep in &manifest.dependencies {
        visit(registry, &dep.package, &dep.constraint, None, 1, &mut path, &mut names, &mut result)?;
    }
    Ok(result)
}

/// Replays a lockfile verbatim: the dynamic-analysis stand-in. Every
/// coordinate must still exist in the registry snapshot.
pub fn replay_lockfile(
    lock: &LockfileDocument,
    registry: &RegistryDocument,
) -> Result<ResolutionResult, ResolveError> {
    let mut result = ResolutionResult::new(ResolutionMode::Lockfile);
    for entry in &lock.packages {
        let known = registry
            .packages
            .get(&entry.coordinate.package_id())
            .is_some_and(|versions| versions.contains_key(&entry.coordinate.version));
        if !known {
            return Err(ResolveError::StaleLockfile(entry.coordinate.clone()));
        }
    }
    for entry in &lock.packages {
        let parent = entry
            .parent
            .as_ref()
            .and_then(|p| result.tree.iter().position(|n| n.coordinate == *p));
        let depth = parent.map_or(1, |i| result.tree[i].depth + 1);
        result.tree.push(TreeNode {
            coordinate: entry.coordinate.clone(),
            parent,
            depth,
            constraint: Constraint::Exact(entry.coordinate.version.clone()),
            mediated: false,
        });
        result.coordinates.insert(entry.coordinate.clone());
    }
    Ok(result)
}

/// Set comparison of two resolution results. `percent_change` is the
/// growth of `other` relative to `baseline`; it is undefined (None, with
/// the flag set) when the baseline is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareMetrics {
    pub baseline_mode: ResolutionMode,
    pub other_mode: ResolutionMode,
    pub baseline_count: usize,
    pub other_count: usize,
    pub only_in_baseline: Vec<Coordinate>,
    pub only_in_other: Vec<Coordinate>,
    pub percent_change: Option<f64>,
    pub undefined_baseline: bool,
}

pub fn compare(baseline: &ResolutionResult, other: &ResolutionResult) -> CompareMetrics {
    let a = &baseline.coordinates;
    let b = &other.coordinates;
    let percent_change = if a.is_empty() {
        None
    } else {
        Some((b.len() as f64 - a.len() as f64) / a.len() as f64 * 100.0)
    };
    CompareMetrics {
        baseline_mode: baseline.mode,
        other_mode: other.mode,
        baseline_count: a.len(),
        other_count: b.len(),
        only_in_baseline: a.difference(b).cloned().collect(),
        only_in_other: b.difference(a).cloned().collect(),
        percent_change,
        undefined_baseline: a.is_empty(),
    }
}
