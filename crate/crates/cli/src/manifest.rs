//! Run manifest written next to every output set. Contains no timestamps so
//! identical inputs give identical bytes.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub trials: u64,
    pub engine: String,
    pub convention: String,
    /// Resolved configuration as TOML.
    pub config: String,
    pub outputs: Vec<String>,
    pub failures: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &ScenarioConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256: config.hash(),
            seed: config.seed,
            trials: config.trials,
            engine: config.engine.to_string(),
            convention: format!("{:?}", config.convention).to_lowercase(),
            config: config.to_toml(),
            outputs: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.manifest.json", self.command)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
