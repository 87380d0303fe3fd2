use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub log: String,
    pub sidecar: String,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_digest: String,
    pub seed: u64,
    pub resolved_config: ConfigFile,
    pub outputs: Outputs,
}

impl RunManifest {
    pub fn new(resolved: ConfigFile, outputs: Outputs) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            config_digest: resolved.digest(),
            seed: resolved.seed.unwrap_or(0),
            resolved_config: resolved,
            outputs,
        }
    }

    /// Checks the stored digest against the stored configuration.
    pub fn verify(&self) -> Result<(), CliError> {
        let actual = self.resolved_config.digest();
        if actual != self.config_digest {
            return Err(CliError::Config(format!(
                "manifest digest {} does not match its configuration ({actual})",
                self.config_digest
            )));
        }
        if self.resolved_config.seed != Some(self.seed) {
            return Err(CliError::Config("manifest seed does not match its configuration".into()));
        }
        Ok(())
    }
}
