//! Run manifest: written into the output directory before any computation so
//! a run can be reproduced exactly from its arguments and resolved
//! configuration.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::FileConfig;

pub const MANIFEST_SCHEMA: &str = "bsts.manifest.v1";

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub version: String,
    pub command: String,
    /// Full argument vector; re-invoking the binary with these reproduces the
    /// run byte for byte.
    pub args: Vec<String>,
    pub config_path: Option<String>,
    /// Configuration after file loading and flag overrides.
    pub resolved_config: FileConfig,
    pub data_paths: Vec<String>,
    pub output_dir: String,
    pub seed: u64,
    /// Output file name -> schema identifier.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_path: Option<&Path>,
        resolved_config: &FileConfig,
        output_dir: &Path,
        seed: u64,
        outputs: &[(&str, &str)],
    ) -> Self {
        let data_paths = [
            resolved_config.data.quarterly.as_ref(),
            resolved_config.data.monthly.as_ref(),
            resolved_config.data.calendar.as_ref(),
        ]
        .iter()
        .flatten()
        .map(|p| p.display().to_string())
        .collect();
        Self {
            schema: MANIFEST_SCHEMA.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args: std::env::args().collect(),
            config_path: config_path.map(|p| p.display().to_string()),
            resolved_config: resolved_config.clone(),
            data_paths,
            output_dir: output_dir.display().to_string(),
            seed,
            outputs: outputs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Write `manifest.json` into the output directory.
    pub fn write(&self, output_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(output_dir)
            .with_context(|| format!("creating {}", output_dir.display()))?;
        let path = output_dir.join("manifest.json");
        let file = std::fs::File::create(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }
}
