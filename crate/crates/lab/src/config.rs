//! Run configuration, JSON config files and the canonical config hash.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::opspec::OperatorSpec;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Keys that never change results and so stay out of the hash.
const UNHASHED: [&str; 2] = ["threads", "out"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: String,
    pub example: Option<String>,
    #[serde(rename = "G")]
    pub g: Option<String>,
    #[serde(rename = "W")]
    pub w: Option<String>,
    pub schedule: Option<String>,
    pub xi: Option<String>,
    pub modulation: Option<String>,
    pub law: Option<String>,
    pub field: Option<String>,
    /// Scalar function on the base space: `one` or `character:M`.
    pub h: Option<String>,
    pub operator: Option<OperatorSpec>,
    /// hilbert: `trace`, `t41`, `t44` or `opnorm`; random: `sup` or `hilbert`.
    pub check: Option<String>,
    pub conditions: Vec<String>,
    pub p: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub r: Option<f64>,
    pub ladder: Option<Vec<u64>>,
    pub n_max: Option<u64>,
    pub grid: Option<usize>,
    pub points: Option<usize>,
    pub samples: Option<u64>,
    pub lambdas: Option<usize>,
    pub fields: Option<usize>,
    pub dim: Option<usize>,
    pub seed: u64,
    pub expect: Vec<String>,
    pub full_sequence: bool,
    pub extended: bool,
    pub no_regime_check: bool,
    pub allow_coarse: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), ..Self::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Canonical form: keys sorted, unhashed keys dropped.
    pub fn canonical(&self) -> String {
        let mut v = serde_json::to_value(self).expect("configs serialize");
        if let Value::Object(map) = &mut v {
            for k in UNHASHED {
                map.remove(k);
            }
        }
        serde_json::to_string(&v).expect("values serialize")
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// `self` with every set value of `flags` on top. Unset flags are
    /// `null`, `false` or empty and leave the file value alone; the seed is
    /// left to the caller, which knows whether it was given.
    pub fn overlay(&self, flags: &RunConfig) -> Result<RunConfig> {
        let mut base = serde_json::to_value(self)?;
        let top = serde_json::to_value(flags)?;
        if let (Value::Object(b), Value::Object(t)) = (&mut base, top) {
            for (k, v) in t {
                let unset = match &v {
                    Value::Null | Value::Bool(false) => true,
                    Value::Array(a) => a.is_empty(),
                    Value::String(s) => s.is_empty(),
                    _ => k == "seed",
                };
                if !unset {
                    b.insert(k, v);
                }
            }
        }
        Ok(serde_json::from_value(base)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order_threads_and_out() {
        let a = RunConfig::from_json(r#"{"command":"check","p":2.0,"beta":0.5,"threads":4}"#).unwrap();
        let b = RunConfig::from_json(r#"{"beta":0.5,"out":"elsewhere","p":2.0,"command":"check"}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        let c = RunConfig::from_json(r#"{"command":"check","p":2.0,"beta":0.25}"#).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn round_trips_losslessly() {
        let mut c = RunConfig::new("random");
        c.g = Some("n^0.5 * ln(n)".into());
        c.ladder = Some(vec![64, 128]);
        c.eps = Some(0.1 + 0.2);
        c.expect = vec!["admissible".into()];
        let back = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn flags_override_file_values() {
        let file = RunConfig::from_json(r#"{"command":"check","p":3.0,"beta":0.5,"seed":9}"#).unwrap();
        let mut flags = RunConfig::new("check");
        flags.p = Some(2.0);
        let merged = file.overlay(&flags).unwrap();
        assert_eq!(merged.p, Some(2.0));
        assert_eq!(merged.beta, Some(0.5));
        assert_eq!(merged.seed, 9);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"command":"check","pp":2}"#).is_err());
    }
}
