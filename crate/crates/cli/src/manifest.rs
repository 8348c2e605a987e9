//! Run manifests. Every command that writes files drops one `manifest.json`
//! next to its outputs recording the invocation, the seeds in play, and the
//! paths read and written, so a run can be reproduced from the artifact
//! directory alone.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub version: String,
    pub wall_clock_seconds: f64,
}

/// Everything a command knows about its own run; timing and version are
/// filled in at write time.
pub struct ManifestInfo<'a> {
    pub command: &'a str,
    pub argv: &'a [String],
    pub seeds: &'a [(&'a str, u64)],
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

pub fn write_run_manifest(
    out_dir: &Path,
    info: ManifestInfo<'_>,
    started: Instant,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        command: info.command.to_string(),
        argv: info.argv.to_vec(),
        seeds: info
            .seeds
            .iter()
            .map(|&(name, seed)| (name.to_string(), seed))
            .collect(),
        inputs: info.inputs,
        outputs: info.outputs,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let path = out_dir.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Data(format!("cannot serialize manifest: {e}")))?;
    body.push('\n');
    std::fs::write(&path, body)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}
