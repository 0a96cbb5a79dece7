//! Provenance blocks attached to every persisted artifact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::splits::GENERATOR_ID;

pub const TOOL: &str = "euphkit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the canonical JSON of the configuration that produced the artifact.
    pub config_hash: String,
    pub seed: u64,
    pub generator: String,
    pub modules: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new<C: Serialize + ?Sized>(config: &C, seed: u64) -> Self {
        let modules = ["corpus", "embedding", "vagueness", "sensitivity", "splits", "harness", "analysis"]
            .into_iter()
            .map(|m| (m.to_string(), VERSION.to_string()))
            .collect();
        Provenance {
            tool: TOOL.into(),
            version: VERSION.into(),
            config_hash: config_hash(config),
            seed,
            generator: GENERATOR_ID.into(),
            modules,
        }
    }
}

/// Hex SHA-256 of `value` serialized as JSON. Object keys of `serde_json::Value`
/// are sorted, so hashing a `Value` is order independent.
pub fn config_hash<C: Serialize + ?Sized>(value: &C) -> String {
    let canonical = serde_json::to_value(value).and_then(|v| serde_json::to_vec(&v)).unwrap_or_default();
    let digest = Sha256::digest(&canonical);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
