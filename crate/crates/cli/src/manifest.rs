use serde::Serialize;
use sha2::{Digest, Sha256};

use ddro_core::instances::instance_to_json;
use ddro_core::model::NetworkInstance;

pub const OUTPUT_SCHEMA: u64 = 1;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub started_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<String>,
}

/// SHA-256 of the canonical instance document.
pub fn instance_hash(instance: &NetworkInstance) -> String {
    let digest = Sha256::digest(instance_to_json(instance).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            config,
            instance_hash: None,
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: Some(now()),
            finished_at: None,
        }
    }

    pub fn instance(mut self, instance: &NetworkInstance) -> Self {
        self.instance_hash = Some(instance_hash(instance));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Drops wall-clock fields so identical inputs give identical bytes.
    pub fn without_timestamps(mut self) -> Self {
        self.started_at = None;
        self.finished_at = None;
        self
    }

    pub fn finish(mut self) -> Self {
        if self.started_at.is_some() {
            self.finished_at = Some(now());
        }
        self
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("manifest serializes")
    }
}
