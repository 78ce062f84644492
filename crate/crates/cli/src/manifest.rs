//! Run manifest: a self-describing record of one `simulate` invocation.
//!
//! The manifest captures the logical command line (never filesystem paths,
//! so runs into different directories stay comparable), the effective
//! config with its digest, and a SHA-256 digest of every file the run
//! wrote. Re-running with the same arguments must reproduce every digest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Everything recorded about one simulation run.
pub struct RunManifest {
    command: String,
    config_echo: String,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl RunManifest {
    /// Starts a manifest for the given logical command and effective
    /// config (the canonical JSON echo, not the user's file).
    pub fn new(command: String, config_echo: String) -> Self {
        Self { command, config_echo, inputs: BTreeMap::new(), outputs: BTreeMap::new() }
    }

    /// Records a generated input file by name and content digest.
    pub fn add_input(&mut self, name: &str, contents: &str) {
        self.inputs.insert(name.to_string(), sha256_hex(contents.as_bytes()));
    }

    /// Records a computed output file by name and content digest.
    pub fn add_output(&mut self, name: &str, contents: &str) {
        self.outputs.insert(name.to_string(), sha256_hex(contents.as_bytes()));
    }

    /// Serializes the manifest; key order is fixed so equal runs produce
    /// equal bytes.
    pub fn to_json_string(&self) -> String {
        let config: serde_json::Value =
            serde_json::from_str(&self.config_echo).expect("config echo is valid JSON");
        let doc = json!({
            "command": self.command,
            "config": config,
            "config_digest": sha256_hex(self.config_echo.as_bytes()),
            "inputs": self.inputs,
            "outputs": self.outputs,
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("manifest serializes");
        out.push('\n');
        out
    }
}

/// Writes `contents` to `dir/name`, recording it in the manifest as an
/// input or output.
pub fn write_file(
    dir: &Path,
    name: &str,
    contents: &str,
    manifest: &mut RunManifest,
    is_input: bool,
) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    if is_input {
        manifest.add_input(name, contents);
    } else {
        manifest.add_output(name, contents);
    }
    Ok(())
}
