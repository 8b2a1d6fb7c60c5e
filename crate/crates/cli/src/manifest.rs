use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Record of one run. Passing it back as `--config` repeats the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    /// Fully resolved config, defaults included.
    pub config: Value,
    pub master_seed: Option<u64>,
    pub timestamp: String,
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: Value,
        master_seed: Option<u64>,
        outputs: Vec<PathBuf>,
    ) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            master_seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            inputs: Vec::new(),
            outputs,
        }
    }
}

/// `data.json` → `data.manifest.json`.
pub fn sibling_manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
