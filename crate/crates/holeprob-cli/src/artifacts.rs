//! In-memory artifact sets, the content-addressed cache and run manifests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "HOLEPROB_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NonConverged,
    InvalidRun,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NonConverged => 3,
            Status::InvalidRun => 4,
        }
    }

    pub fn worst(self, other: Status) -> Status {
        if self.exit_code() >= other.exit_code() {
            self
        } else {
            other
        }
    }
}

/// Named files of one run; the first is the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub status: Status,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cache_dir(out_dir: &Path) -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => out_dir.join(".holeprob-cache"),
    }
}

pub fn cache_load(dir: &Path, key: &str) -> Option<Artifacts> {
    let bytes = fs::read(dir.join(format!("{key}.json"))).ok()?;
    serde_json::from_slice(&bytes).ok()
}

pub fn cache_store(dir: &Path, key: &str, a: &Artifacts) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!("{key}.json.tmp"));
    fs::write(&tmp, serde_json::to_vec(a)?)?;
    fs::rename(tmp, dir.join(format!("{key}.json")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub subcommand: String,
    pub cache_key: String,
    pub cache_hit: bool,
    pub timestamp_unix: u64,
    pub status: Status,
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
}

/// Writes the artifacts into `dir` and returns their manifest entries.
pub fn write_all(dir: &Path, a: &Artifacts) -> io::Result<Vec<FileEntry>> {
    fs::create_dir_all(dir)?;
    let mut out = vec![];
    for (name, bytes) in &a.files {
        fs::write(dir.join(name), bytes)?;
        out.push(FileEntry { path: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() });
    }
    Ok(out)
}
