use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Record of one successful command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub config_hash: String,
    pub archive_digest: Option<String>,
    pub version: &'static str,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(
        command: impl Into<String>,
        config: Value,
        archive_digest: Option<String>,
        started: DateTime<Utc>,
    ) -> Self {
        RunManifest {
            command: command.into(),
            config_hash: config_hash(&config),
            config,
            archive_digest,
            version: env!("CARGO_PKG_VERSION"),
            started: started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished: String::new(),
            outputs: Vec::new(),
        }
    }

    /// Key under which outputs of equal runs can be reused.
    pub fn cache_key(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.config_hash.as_bytes());
        h.update(self.archive_digest.as_deref().unwrap_or("").as_bytes());
        h.update(self.version.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn write(mut self, path: &Path) -> anyhow::Result<()> {
        self.finished = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))
    }
}

/// SHA-256 of the configuration's canonical JSON (serde_json sorts object
/// keys).
pub fn config_hash(config: &Value) -> String {
    hex::encode(Sha256::digest(config.to_string().as_bytes()))
}

pub fn file_digest(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format!("sha256:{}", hex::encode(Sha256::digest(&bytes))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_ignores_key_order() {
        let a = json!({"order": 3, "smoothing": "mkn"});
        let b: Value = serde_json::from_str(r#"{"smoothing":"mkn","order":3}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&json!({"order": 4, "smoothing": "mkn"})));
    }
}
