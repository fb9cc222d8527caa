//! Scenario files: dotted TOML sections mirroring the config structs.

use std::path::Path;

use isac_sim::ScenarioConfig;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Parses without range checks. Unknown keys are rejected; missing keys
/// keep their defaults.
pub fn parse_config_str(text: &str, origin: &str) -> Result<ScenarioConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse { origin: origin.to_string(), message: e.to_string() })
}

/// Parses and range-checks, reporting every violation at once.
pub fn validated(cfg: ScenarioConfig) -> Result<ScenarioConfig, CliError> {
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Validation(v))
    }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    validated(parse_config_str(&text, &path.display().to_string())?)
}

/// Canonical serialization: field order follows the struct definitions and
/// floats use the shortest round-trip form, so the text is platform stable.
pub fn canonical_text(cfg: &ScenarioConfig) -> Result<String, CliError> {
    toml::to_string(cfg).map_err(|e| CliError::Runtime(format!("config serialization: {e}")))
}

/// SHA-256 of the canonical text, lowercase hex.
pub fn config_hash(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let digest = Sha256::digest(canonical_text(cfg)?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
