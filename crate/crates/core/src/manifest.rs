//! Run manifests: what a command was asked to do and what it touched.
//!
//! The manifest id hashes everything except timestamps, file paths and
//! outputs, so identical runs in different directories share an id.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::RNG_ALGORITHM;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of_bytes(role: &str, path: &str, data: &[u8]) -> Self {
        FileDigest {
            role: role.to_string(),
            path: path.to_string(),
            sha256: sha256_hex(data),
            bytes: data.len() as u64,
        }
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_id: String,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub seed: u64,
    pub rng: String,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: Option<String>,
}

#[derive(Serialize)]
struct IdBody<'a> {
    command: &'a str,
    parameters: &'a BTreeMap<String, Value>,
    inputs: Vec<(&'a str, &'a str)>,
    seed: u64,
    rng: &'a str,
    tool_version: &'a str,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, seed: u64) -> Self {
        RunManifest {
            manifest_id: String::new(),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
            rng: RNG_ALGORITHM.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            started_at: now(),
            finished_at: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.parameters.insert(key.to_string(), v);
        self.refresh_id();
        self
    }

    pub fn input(&mut self, role: &str, path: &str, data: &[u8]) -> &mut Self {
        self.inputs.push(FileDigest::of_bytes(role, path, data));
        self.refresh_id();
        self
    }

    pub fn output(&mut self, role: &str, path: &str, data: &[u8]) -> &mut Self {
        self.outputs.push(FileDigest::of_bytes(role, path, data));
        self
    }

    fn refresh_id(&mut self) {
        let body = IdBody {
            command: &self.command,
            parameters: &self.parameters,
            inputs: self.inputs.iter().map(|d| (d.role.as_str(), d.sha256.as_str())).collect(),
            seed: self.seed,
            rng: &self.rng,
            tool_version: &self.tool_version,
        };
        self.manifest_id = sha256_hex(&serde_json::to_vec(&body).expect("manifest serializes"));
    }

    pub fn id(&self) -> &str {
        &self.manifest_id
    }

    pub fn finish(&mut self) {
        self.finished_at = Some(now());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// `<output>.manifest.json` next to an output file.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}
