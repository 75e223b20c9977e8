use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub master_seed: Option<u64>,
    /// task path -> derived seed; replicas mix their index into the task seed
    pub task_seeds: BTreeMap<String, u64>,
    pub library_version: String,
    pub wall_clock_secs: f64,
    /// file name (relative to the output dir) -> sha256
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes files into one directory and records their digests.
pub struct OutputSet {
    dir: PathBuf,
    pub digests: BTreeMap<String, String>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputSet { dir: dir.to_path_buf(), digests: BTreeMap::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.digests.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }
}
