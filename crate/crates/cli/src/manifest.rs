use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one subcommand invocation, written beside its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub version: String,
    pub subcommand: String,
    /// Arguments after the program name.
    pub argv: Vec<String>,
    /// Effective model configuration, if the command has one.
    pub config: Option<String>,
    pub seed: u64,
    pub paper_scale: bool,
    pub threads: usize,
    pub wall_clock_secs: f64,
    /// sha256 of every output file, keyed by file name.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn load(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(dir.join(MANIFEST_FILE), text + "\n")
    }
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn hash_outputs(dir: &Path, files: &[String]) -> io::Result<BTreeMap<String, String>> {
    files
        .iter()
        .map(|f| Ok((f.clone(), sha256_file(&dir.join(f))?)))
        .collect()
}

/// Files whose hashes differ between two manifests (or that one lacks).
pub fn differing_outputs(a: &Manifest, b: &Manifest) -> Vec<String> {
    let mut keys: Vec<&String> = a.outputs.keys().chain(b.outputs.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter(|k| a.outputs.get(*k) != b.outputs.get(*k))
        .cloned()
        .collect()
}
