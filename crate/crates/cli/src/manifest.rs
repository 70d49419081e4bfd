//! Run manifests written beside every output.
//!
//! A manifest holds everything needed to repeat a run: the command and its
//! arguments, the fully resolved configuration and its hash, the derived
//! seeds, which components were mocked, and content fingerprints of every
//! input and output. It has no timestamps, so equal runs produce equal
//! manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mixaug_core::seed::fingerprint;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::failure::{CmdResult, ResultExt};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mocks {
    pub endpoint: bool,
    pub trainer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: serde_json::Value,
    pub seed: u64,
    pub stream_seeds: BTreeMap<String, u64>,
    pub mocks: Mocks,
    pub config_hash: String,
    pub config: RunConfig,
    pub inputs: BTreeMap<String, FileRef>,
    pub outputs: BTreeMap<String, FileRef>,
}

/// Canonical hash of a resolved configuration.
pub fn config_hash(config: &RunConfig) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    fingerprint(value.to_string().as_bytes())
}

fn file_ref(path: &Path, shown: String) -> CmdResult<FileRef> {
    let bytes = fs::read(path).runtime(format!("cannot fingerprint {}", path.display()))?;
    Ok(FileRef {
        path: shown,
        sha256: fingerprint(&bytes),
    })
}

pub struct ManifestBuilder {
    manifest: RunManifest,
    path: PathBuf,
    dir: PathBuf,
}

impl ManifestBuilder {
    /// Starts a manifest that will be written to `dir/manifest.json`.
    pub fn new(command: &str, args: &impl Serialize, config: &RunConfig, mocks: Mocks, dir: &Path) -> Self {
        Self::at(command, args, config, mocks, dir.join(MANIFEST_FILE))
    }

    /// Manifest for a single-file output `out`, written to `out.manifest.json`.
    pub fn beside(command: &str, args: &impl Serialize, config: &RunConfig, mocks: Mocks, out: &Path) -> Self {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        Self::at(command, args, config, mocks, out.with_file_name(name))
    }

    fn at(command: &str, args: &impl Serialize, config: &RunConfig, mocks: Mocks, path: PathBuf) -> Self {
        let manifest = RunManifest {
            tool: "mixaug".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args: serde_json::to_value(args).expect("arguments serialize"),
            seed: config.seed,
            stream_seeds: config
                .stream_seeds()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            mocks,
            config_hash: config_hash(config),
            config: config.clone(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        };
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self { manifest, path, dir }
    }

    pub fn input(&mut self, name: &str, path: &Path) -> CmdResult<&mut Self> {
        let r = file_ref(path, path.display().to_string())?;
        self.manifest.inputs.insert(name.into(), r);
        Ok(self)
    }

    /// Records an output. Paths inside the manifest directory are stored
    /// relative to it.
    pub fn output(&mut self, name: &str, path: &Path) -> CmdResult<&mut Self> {
        let shown = path.strip_prefix(&self.dir).unwrap_or(path).display().to_string();
        let r = file_ref(path, shown)?;
        self.manifest.outputs.insert(name.into(), r);
        Ok(self)
    }

    pub fn write(&self) -> CmdResult<PathBuf> {
        write_json(&self.path, &self.manifest)?;
        Ok(self.path.clone())
    }
}

/// Pretty-prints `value` to `path`, creating parent directories.
pub fn write_json(path: &Path, value: &impl Serialize) -> CmdResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> CmdResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).runtime(format!("cannot create {}", parent.display()))?;
    }
    fs::write(path, text).runtime(format!("cannot write {}", path.display()))
}
