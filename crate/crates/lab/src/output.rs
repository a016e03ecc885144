//! Run directories `OUT/<config hash>/`. Files are buffered and written in
//! one pass; every JSON file carries the config hash and tool version, every
//! CSV starts with a `#` line carrying both.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, TOOL_VERSION};
use crate::error::{LabError, Result};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub hash: String,
    /// File name to contents, in name order.
    pub files: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// First 16 hex digits of the digest of a value's JSON.
pub fn value_hash<T: Serialize>(v: &T) -> Result<String> {
    Ok(sha256_hex(serde_json::to_string(v)?.as_bytes())[..16].to_string())
}

impl RunOutput {
    pub fn new(cfg: &RunConfig) -> Self {
        Self { hash: cfg.hash(), files: BTreeMap::new() }
    }

    /// `{config_hash, tool_version, kind, data}`.
    pub fn json<T: Serialize>(&mut self, name: &str, kind: &str, data: &T) -> Result<()> {
        let v = json!({
            "config_hash": self.hash,
            "tool_version": TOOL_VERSION,
            "kind": kind,
            "data": serde_json::to_value(data)?,
        });
        self.files.insert(format!("{name}.json"), serde_json::to_string_pretty(&v)? + "\n");
        Ok(())
    }

    /// `header` holds extra `key=value` pairs for the comment line.
    pub fn csv(&mut self, name: &str, header: &[(&str, String)], body: &str) {
        let mut line = format!("# config_hash={} tool_version={TOOL_VERSION}", self.hash);
        for (k, v) in header {
            line.push_str(&format!(" {k}={v}"));
        }
        self.files.insert(format!("{name}.csv"), format!("{line}\n{body}"));
    }

    pub fn get_json(&self, name: &str) -> Option<Value> {
        serde_json::from_str(self.files.get(&format!("{name}.json"))?).ok()
    }

    fn manifest(&self, cfg: &RunConfig) -> Result<String> {
        let files: BTreeMap<&String, String> = self.files.iter().map(|(k, v)| (k, sha256_hex(v.as_bytes()))).collect();
        let v = json!({
            "config_hash": self.hash,
            "tool_version": TOOL_VERSION,
            "config": serde_json::from_str::<Value>(&cfg.canonical())?,
            "files": files,
        });
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    /// Writes every file plus `manifest.json` under `root/<hash>/`.
    pub fn write(&self, root: &Path, cfg: &RunConfig) -> Result<PathBuf> {
        let dir = root.join(&self.hash);
        std::fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
        let manifest = self.manifest(cfg)?;
        for (name, body) in self.files.iter().chain(std::iter::once((&"manifest.json".to_string(), &manifest))) {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| LabError::io(&path, e))?;
        }
        Ok(dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelopes_and_manifest() {
        let cfg = RunConfig::new("check");
        let mut out = RunOutput::new(&cfg);
        out.json("a", "test", &vec![1, 2]).unwrap();
        out.csv("t", &[("meaningful_regime", "false".into())], "n,x\n1,2\n");
        let a = out.get_json("a").unwrap();
        assert_eq!(a["config_hash"], cfg.hash());
        assert_eq!(a["tool_version"], TOOL_VERSION);
        assert!(out.files["t.csv"].starts_with(&format!("# config_hash={}", cfg.hash())));
        assert!(out.files["t.csv"].contains("meaningful_regime=false"));

        let dir = tempfile::tempdir().unwrap();
        let path = out.write(dir.path(), &cfg).unwrap();
        let first = std::fs::read(path.join("manifest.json")).unwrap();
        out.write(dir.path(), &cfg).unwrap();
        assert_eq!(first, std::fs::read(path.join("manifest.json")).unwrap());
    }
}
