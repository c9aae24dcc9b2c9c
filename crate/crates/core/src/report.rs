//! Machine-readable run reports.
//!
//! Maps are ordered and nothing time-dependent is recorded, so the same inputs,
//! flags and seed always serialize to the same bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub stage: String,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, Value>,
    pub verdicts: BTreeMap<String, String>,
    pub statistics: BTreeMap<String, Value>,
    /// SHA-256 of each named input or output, hex encoded.
    pub provenance: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

impl RunReport {
    pub fn new(stage: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            stage: stage.into(),
            seed,
            ..Self::default()
        }
    }

    pub fn param(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_string(), to_value(v));
        self
    }

    pub fn verdict(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.verdicts.insert(key.to_string(), v.into());
        self
    }

    pub fn stat(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.statistics.insert(key.to_string(), to_value(v));
        self
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) -> &mut Self {
        self.provenance.insert(format!("input:{name}"), sha256_hex(bytes));
        self
    }

    pub fn output(&mut self, name: &str, bytes: &[u8]) -> &mut Self {
        self.provenance.insert(format!("output:{name}"), sha256_hex(bytes));
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_serialization() {
        let build = || {
            let mut r = RunReport::new("gen", Some(7));
            r.param("n", 8).param("m", 64).stat("positives", 3).verdict("outcome", "ok");
            r.output("formula", b"p gcsp 8 0 3 1\n");
            r
        };
        assert_eq!(build().to_json(), build().to_json());
        let back: RunReport = serde_json::from_str(&build().to_json()).unwrap();
        assert_eq!(back, build());
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
