//! Run outputs are built in memory, staged in a temporary directory next to
//! the destination, and moved into place only after every file is written.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: Option<u64>,
    chosen_k: Option<usize>,
    inputs: Vec<InputRecord>,
    /// Artifact name to sha256 of its bytes.
    artifacts: BTreeMap<&'a str, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    settings: Option<&'a serde_json::Value>,
}

#[derive(Debug)]
pub struct ArtifactSet {
    command: &'static str,
    files: Vec<(String, Vec<u8>)>,
    inputs: Vec<(String, Vec<u8>)>,
    pub seed: Option<u64>,
    pub chosen_k: Option<usize>,
    pub settings: Option<serde_json::Value>,
}

impl ArtifactSet {
    pub fn new(command: &'static str) -> Self {
        ArtifactSet {
            command,
            files: Vec::new(),
            inputs: Vec::new(),
            seed: None,
            chosen_k: None,
            settings: None,
        }
    }

    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        debug_assert!(name != MANIFEST && !self.files.iter().any(|(n, _)| n == name));
        self.files.push((name.to_string(), contents.into()));
    }

    /// Reads an input file, recording its hash for the manifest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("{}: cannot read input", path.display()))?;
        self.inputs.push((path.display().to_string(), bytes.clone()));
        Ok(bytes)
    }

    fn manifest(&self) -> Vec<u8> {
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            chosen_k: self.chosen_k,
            inputs: self
                .inputs
                .iter()
                .map(|(p, b)| InputRecord {
                    path: p.clone(),
                    sha256: sha256_hex(b),
                })
                .collect(),
            artifacts: self.files.iter().map(|(n, b)| (n.as_str(), sha256_hex(b))).collect(),
            settings: self.settings.as_ref(),
        };
        let mut out = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        out.push(b'\n');
        out
    }

    /// Writes every artifact plus `manifest.json` into `out`. Nothing appears
    /// in `out` unless all files were staged successfully.
    pub fn commit(self, out: &Path) -> Result<Vec<PathBuf>> {
        if out.exists() && !out.is_dir() {
            bail!("{}: output path exists and is not a directory", out.display());
        }
        let parent = match out.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).with_context(|| format!("{}: cannot create directory", parent.display()))?;
        let staging = tempfile::Builder::new()
            .prefix(".genscope-staging-")
            .tempdir_in(&parent)
            .with_context(|| format!("{}: cannot create staging directory", parent.display()))?;
        let manifest = self.manifest();
        let mut staged: Vec<(&str, &[u8])> = self.files.iter().map(|(n, b)| (n.as_str(), b.as_slice())).collect();
        staged.push((MANIFEST, &manifest));
        for (name, bytes) in &staged {
            let path = staging.path().join(name);
            fs::write(&path, bytes).with_context(|| format!("{}: cannot write", path.display()))?;
        }
        let mut written = Vec::with_capacity(staged.len());
        if !out.exists() {
            let staged_dir = staging.keep();
            fs::rename(&staged_dir, out)
                .with_context(|| format!("{}: cannot move output into place", out.display()))?;
            written.extend(staged.iter().map(|(n, _)| out.join(n)));
        } else {
            for (name, _) in &staged {
                let target = out.join(name);
                fs::rename(staging.path().join(name), &target)
                    .with_context(|| format!("{}: cannot move output into place", target.display()))?;
                written.push(target);
            }
        }
        Ok(written)
    }
}
