//! The run manifest embedded in every output for reproducibility.

use serde::{Deserialize, Serialize};

/// Everything needed to reproduce one command invocation. Serialized into a
/// `# manifest:` comment line at the top of CSV outputs and a `manifest`
/// field of JSON outputs; `rerun` re-executes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    /// Subcommand name.
    pub command: String,
    /// The full resolved argument list after the subcommand, including any
    /// seed that was taken from the environment.
    pub args: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        RunManifest {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args,
        }
    }

    /// Compact single-line JSON for CSV comment embedding.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    pub fn from_line(line: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}
