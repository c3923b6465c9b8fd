//! Software composition analysis over a language-neutral program IR.
//!
//! The crate is organized as a pipeline of pure passes over immutable
//! values: `depres` discovers library coordinates, `static_cg` and
//! `dynamic_cg` build application call graphs, `chains` precomputes
//! per-library paths to vulnerability sinks, `compose` merges everything
//! into one graph and answers reachability by vertex membership, and
//! `remediate` flags upgrades whose changed methods the application calls.

pub mod chains;
pub mod compose;
pub mod depres;
pub mod dynamic_cg;
pub mod formats;
pub mod model;
pub mod remediate;
pub mod static_cg;

pub use model::{
    CallChain, CallGraph, Coordinate, Descriptor, Edge, EntryPointSet, MethodRef, Origin,
    OriginMap, OriginRule, PackageId, Provenance, Version,
};
