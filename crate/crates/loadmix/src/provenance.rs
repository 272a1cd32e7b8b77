//! Provenance stamped on every output file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{IoConfig, RunConfig};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub config_sha256: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
}

impl Provenance {
    /// Hashes the effective configuration. The `io` paths are left out: they
    /// say where files live, not how results are computed, and the input's
    /// content is hashed separately.
    pub fn new(config: &RunConfig, seed: u64, input: Option<&[u8]>) -> Self {
        let mut knobs = config.clone();
        knobs.io = IoConfig::default();
        knobs.seed = Some(seed);
        let json = serde_json::to_vec(&knobs).expect("config serializes");
        Self {
            tool: TOOL_VERSION.to_string(),
            config_sha256: sha256_hex(&json),
            seed,
            input_sha256: input.map(sha256_hex),
        }
    }

    /// `# key: value` lines for the top of a CSV file.
    pub fn csv_header(&self) -> String {
        let mut out =
            format!("# tool: {}\n# config_sha256: {}\n# seed: {}\n", self.tool, self.config_sha256, self.seed);
        if let Some(h) = &self.input_sha256 {
            out.push_str(&format!("# input_sha256: {h}\n"));
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
