//! Run manifests: what was run, on which inputs, producing which files.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical scenario JSON (and of the data file for `reconstruct`).
    pub scenario_hash: String,
    pub parameters: BTreeMap<String, Value>,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
    pub summary: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(command: &str, scenario_hash: String) -> Self {
        Self {
            command: command.to_string(),
            scenario_hash,
            parameters: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: 0.0,
            outputs: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn write(&mut self, dir: &Path) -> Result<()> {
        self.outputs.sort();
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE))?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("halfspace", "abc".into());
        m.param("alpha", 1e-6).param("seed", 7);
        m.outputs = vec!["b.csv".into(), "a.csv".into()];
        m.write(dir.path()).unwrap();
        let back = RunManifest::read(dir.path()).unwrap();
        assert_eq!(back.outputs, vec!["a.csv", "b.csv"]);
        assert_eq!(back.parameters["seed"], 7);
    }
}
