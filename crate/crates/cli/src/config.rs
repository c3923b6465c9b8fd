//! Optional configuration file pointed to by `SCA_CONFIG`, mirroring
//! the command-line flags. Explicit flags always win over the file.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Deserialize;

use sca_core::OriginMap;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default, rename = "framework-prefix")]
    pub framework_prefixes: Vec<String>,
    #[serde(default)]
    pub origins: Option<OriginMap>,
    #[serde(default, rename = "entrypoint-filter")]
    pub entrypoint_filter: Option<String>,
    #[serde(default, rename = "max-chain-length")]
    pub max_chain_length: Option<usize>,
    #[serde(default, rename = "max-chains-per-sink")]
    pub max_chains_per_sink: Option<usize>,
    #[serde(default, rename = "merge-mode")]
    pub merge_mode: Option<String>,
    #[serde(default, rename = "graph-mode")]
    pub graph_mode: Option<String>,
    #[serde(default)]
    pub format: Option<String>,
}

impl FileConfig {
    pub fn from_env() -> Result<FileConfig> {
        match std::env::var_os("SCA_CONFIG") {
            None => Ok(FileConfig::default()),
            Some(path) => {
                let path = PathBuf::from(path);
                let bytes = std::fs::read(&path)
                    .with_context(|| format!("reading SCA_CONFIG file {}", path.display()))?;
                serde_json::from_slice(&bytes)
                    .with_context(|| format!("parsing SCA_CONFIG file {}", path.display()))
            }
        }
    }
}
