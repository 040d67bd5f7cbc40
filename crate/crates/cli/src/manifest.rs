use crate::error::{CliError, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to every result file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the config text, when there was one.
    pub config_digest: Option<String>,
    pub config_name: Option<String>,
    pub master_seed: Option<u64>,
    pub version: String,
    pub workers: usize,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    pub low_confidence: bool,
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(command: &str, started: DateTime<Utc>, workers: usize) -> Self {
        Self {
            command: command.to_string(),
            config_digest: None,
            config_name: None,
            master_seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            workers,
            started: timestamp(started),
            finished: String::new(),
            outputs: Vec::new(),
            low_confidence: false,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Serialize(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_sensitive() {
        assert_eq!(
            digest(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(digest("seed = 1\n"), digest("seed = 1\n"));
        assert_ne!(digest("seed = 1\n"), digest("seed = 2\n"));
    }
}
