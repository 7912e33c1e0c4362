use serde::Serialize;

/// Provenance block written alongside every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub tool_version: String,
    /// RFC 3339 wall-clock time of the run; the only nondeterministic field.
    pub wall_clock: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        inputs: Vec<String>,
        seed: Option<u64>,
        config: serde_json::Value,
    ) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            seed,
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        }
    }
}
