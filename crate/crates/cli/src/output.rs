//! Reports, manifests and atomic file output.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use contact_core::RngKey;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::LabResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Starved,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            status: Status::from_bool(ok),
            detail: detail.into(),
        }
    }

    pub fn starved(name: &str, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            status: Status::Starved,
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub kind: String,
    pub verdict: Status,
    pub checks: Vec<Check>,
    pub config: ExperimentConfig,
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(config: &ExperimentConfig, checks: Vec<Check>, data: serde_json::Value) -> Self {
        let verdict = if checks.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else if checks.iter().any(|c| c.status == Status::Starved) {
            Status::Starved
        } else {
            Status::Pass
        };
        Self {
            name: config.name.clone(),
            kind: config.experiment.kind().to_string(),
            verdict,
            checks,
            config: config.clone(),
            data,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Status::Pass => 0,
            Status::Fail => 2,
            Status::Starved => 3,
        }
    }
}

/// A report plus the CSV files that go next to it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub files: Vec<(String, String)>,
}

impl RunOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, body)| body.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    pub wall_clock_secs: f64,
    pub master_seed: u64,
    /// Seed of the key used by replica `i`.
    pub replica_seeds: Vec<u64>,
    pub files: Vec<FileEntry>,
}

pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    sha256_hex(config.to_toml().as_bytes())
}

/// Writes `body` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, body: &[u8]) -> LabResult<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes the report, every CSV and finally the manifest into `dir`.
pub fn persist(dir: &Path, output: &RunOutput, wall_clock_secs: f64) -> LabResult<RunManifest> {
    fs::create_dir_all(dir)?;
    let mut report = serde_json::to_string_pretty(&output.report).expect("report serializes");
    report.push('\n');
    let mut entries = Vec::new();
    let all = std::iter::once((REPORT_FILE, report.as_str()))
        .chain(output.files.iter().map(|(n, b)| (n.as_str(), b.as_str())));
    for (name, body) in all {
        write_atomic(&dir.join(name), body.as_bytes())?;
        entries.push(FileEntry {
            name: name.to_string(),
            bytes: body.len() as u64,
            sha256: sha256_hex(body.as_bytes()),
        });
    }
    let cfg = &output.report.config;
    let manifest = RunManifest {
        config_hash: config_hash(cfg),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_secs,
        master_seed: cfg.seed,
        replica_seeds: (0..cfg.replicas)
            .map(|r| RngKey::for_replica(cfg.seed, r).seed)
            .collect(),
        files: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, b"x,y\n").unwrap();
        write_atomic(&p, b"x,y\n1,2\n").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "x,y\n1,2\n");
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
