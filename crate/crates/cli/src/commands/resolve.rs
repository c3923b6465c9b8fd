//! `sca resolve`: dependency discovery under a chosen semantics.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};

use sca_core::depres::{self, ResolutionResult};
use sca_core::formats::{self, emit_report, FindingsReport};

use crate::config::FileConfig;
use crate::pipeline::{emit, read, FormatArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResolveModeArg {
    Declared,
    Maven,
    Npm,
    Lockfile,
}

#[derive(Args)]
pub struct ResolveArgs {
    /// Resolution semantics to apply
    #[arg(long, value_enum, default_value = "maven")]
    mode: ResolveModeArg,
    /// Dependency manifest (required except in lockfile mode)
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Registry snapshot
    #[arg(long)]
    registry: PathBuf,
    /// Lockfile to replay (lockfile mode)
    #[arg(long)]
    lockfile: Option<PathBuf>,
    /// Also resolve under this mode and report the comparison,
    /// with the extra mode as the baseline
    #[arg(long, value_enum)]
    compare_with: Option<ResolveModeArg>,
    /// Report format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

fn resolve_one(
    mode: ResolveModeArg,
    manifest: Option<&PathBuf>,
    registry: &formats::RegistryDocument,
    lockfile: Option<&PathBuf>,
) -> Result<ResolutionResult> {
    if mode == ResolveModeArg::Lockfile {
        let path = lockfile.ok_or_else(|| anyhow::anyhow!("lockfile mode requires --lockfile"))?;
        let lock = formats::load_lockfile(&read(path)?)
            .with_context(|| format!("parsing lockfile {}", path.display()))?;
        return Ok(depres::replay_lockfile(&lock, registry)?);
    }
    let path = manifest.ok_or_else(|| anyhow::anyhow!("mode {mode:?} requires --manifest"))?;
    let manifest = formats::load_manifest(&read(path)?)
        .with_context(|| format!("parsing manifest {}", path.display()))?;
    let result = match mode {
        ResolveModeArg::Declared => depres::resolve_declared(&manifest, registry),
        ResolveModeArg::Maven => depres::resolve_maven(&manifest, registry)?,
        ResolveModeArg::Npm => depres::resolve_npm(&manifest, registry)?,
        ResolveModeArg::Lockfile => unreachable!("handled above"),
    };
    Ok(result)
}

pub fn run(args: ResolveArgs, config: &FileConfig) -> Result<bool> {
    let registry = formats::load_registry(&read(&args.registry)?)
        .with_context(|| format!("parsing registry {}", args.registry.display()))?;

    let resolution = resolve_one(args.mode, args.manifest.as_ref(), &registry, args.lockfile.as_ref())?;
    let comparison = match args.compare_with {
        None => None,
        Some(mode) if mode == args.mode => bail!("--compare-with must differ from --mode"),
        Some(mode) => {
            let baseline = resolve_one(mode, args.manifest.as_ref(), &registry, args.lockfile.as_ref())?;
            Some(depres::compare(&baseline, &resolution))
        }
    };

    let report = FindingsReport {
        resolution: Some(resolution),
        comparison,
        ..FindingsReport::default()
    };
    let format = args.format.or_else(|| FormatArg::from_config(config)).unwrap_or(FormatArg::Json);
    emit(args.output.as_deref(), &emit_report(&report, format.report_format()))?;
    Ok(false)
}
