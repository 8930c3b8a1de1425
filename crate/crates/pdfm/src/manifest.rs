//! Reproducibility manifests: every command that writes a report can embed
//! the exact invocation, seed, tool version, input digests, and timestamp.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Result;

/// SHA-256 of a single input file, hex encoded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
    pub input_digests: Vec<InputDigest>,
    /// RFC 3339 UTC timestamp taken when the manifest was collected.
    pub timestamp: String,
}

/// Hex-encoded SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Reads and digests one input file.
pub fn digest_file(path: &Path) -> Result<InputDigest> {
    let bytes = fs::read(path)?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

impl RunManifest {
    /// Collects a manifest for the given invocation, digesting each input.
    pub fn collect<P: AsRef<Path>>(
        command_line: Vec<String>,
        seed: Option<u64>,
        inputs: &[P],
    ) -> Result<Self> {
        let mut input_digests = Vec::with_capacity(inputs.len());
        for p in inputs {
            input_digests.push(digest_file(p.as_ref())?);
        }
        Ok(RunManifest {
            command_line,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digests,
            timestamp: chrono::Utc::now().to_rfc3339(),
        })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("manifest serializes")
    }
}
