use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to a run's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    /// SHA-256 of every input file, keyed by path.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<PathBuf>,
    pub threads: usize,
    pub version: String,
    pub wall_clock_seconds: f64,
}

pub fn digest(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: serde_json::Value, threads: usize) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            parameters,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            threads,
            version: netrefine::VERSION.to_string(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.wall_clock_seconds = elapsed.as_secs_f64();
    }
}
