use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, PaprProfile};

/// Everything needed to rerun a sweep bit-exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub seed_derivation: String,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            seed_derivation: "ChaCha8(seed), stream = 8 * trial + purpose, first u64".into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises")
    }
}

/// CSV with columns `method, sample_index, power`.
pub fn papr_csv(entries: &[(String, PaprProfile)]) -> String {
    let mut out = String::from("method,sample_index,power\n");
    for (name, p) in entries {
        for (l, v) in p.power.iter().enumerate() {
            writeln!(out, "{name},{l},{v:.9e}").unwrap();
        }
    }
    out
}
