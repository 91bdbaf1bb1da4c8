//! Run manifests and file hashing.

use std::path::Path;

use nfwave_core::analysis::MetricsReport;
use nfwave_core::domain::Scenario;
use nfwave_core::solver::Timings;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of scenario text with line endings normalized to `\n`.
pub fn scenario_hash(text: &str) -> String {
    sha256_hex(text.replace("\r\n", "\n").as_bytes())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl FileEntry {
    pub fn of(dir: &Path, name: &str) -> std::io::Result<Self> {
        let bytes = std::fs::read(dir.join(name))?;
        Ok(Self {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub field: String,
    pub value: u64,
}

/// Roughness seeds in object order.
pub fn scenario_seeds(s: &Scenario) -> Vec<SeedEntry> {
    s.reflectors
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            r.roughness.as_ref().map(|rough| SeedEntry {
                field: format!("reflectors[{i}].roughness.seed"),
                value: rough.seed,
            })
        })
        .collect()
}

/// Record of one `run`. Lists every other file of the output directory.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub scenario_hash: String,
    pub tool_version: String,
    pub seeds: Vec<SeedEntry>,
    pub files: Vec<FileEntry>,
    pub timings: Timings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
}
