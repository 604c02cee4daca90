use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::stages::StageOutcome;

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    stage: &'a str,
    tool_version: &'a str,
    seed: u64,
    horizon: Option<usize>,
    config: &'a PipelineConfig,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

fn digest(root: &Path, path: &Path) -> FileDigest {
    let sha256 = match fs::read(path) {
        Ok(bytes) => Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect(),
        Err(_) => "missing".to_string(),
    };
    let shown = path.strip_prefix(root).unwrap_or(path);
    FileDigest { path: shown.display().to_string(), sha256 }
}

/// Appends one JSON line describing a finished stage.
pub fn append(
    manifest: &Path,
    root: &Path,
    stage: &str,
    cfg: &PipelineConfig,
    horizon: Option<usize>,
    outcome: &StageOutcome,
) -> std::io::Result<()> {
    let entry = ManifestEntry {
        stage,
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        horizon,
        config: cfg,
        inputs: outcome.inputs.iter().map(|p| digest(root, p)).collect(),
        outputs: outcome.outputs.iter().map(|p| digest(root, p)).collect(),
    };
    if let Some(parent) = manifest.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut line = serde_json::to_string(&entry).map_err(std::io::Error::other)?;
    line.push('\n');
    let mut file = OpenOptions::new().create(true).append(true).open(manifest)?;
    file.write_all(line.as_bytes())?;
    file.sync_all()
}
