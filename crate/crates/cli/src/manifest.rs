//! Run manifests: content hashes of inputs and outputs plus the exact
//! parameters, so identical runs are checkable byte for byte. Only file
//! names (not directories) are recorded, keeping manifests stable across
//! working directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::AppError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, String>) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            parameters,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), AppError> {
        self.inputs.push(digest_file(path)?);
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) -> Result<(), AppError> {
        self.outputs.push(digest_file(path)?);
        Ok(())
    }

    /// Write `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), AppError> {
        let path = dir.join("manifest.json");
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        fs::write(&path, body)?;
        Ok(())
    }
}

pub fn digest_file(path: &Path) -> Result<FileDigest, AppError> {
    let contents =
        fs::read(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(&contents);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(FileDigest {
        name,
        sha256: hex::encode(digest),
    })
}
