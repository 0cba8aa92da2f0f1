//! Run manifest: the reproduction recipe written next to every artifact.
//!
//! The manifest embeds the effective configuration twice: structured (for
//! machine consumption) and as emitted TOML (byte-for-byte reusable as a
//! config file). Artifact checksums let a reader verify that data files
//! belong to this manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use lambda_sr::ode::SolverStats;
use lambda_sr::params::ScaledParams;

use crate::config::{emit_config, parse_config, RunConfig};
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub created_utc: String,
    pub engine_version: String,
    pub config: RunConfig,
    /// The config serialized back to TOML; parsing it reproduces `config`.
    pub config_toml: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled: Option<ScaledParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_stats: Option<SolverStats>,
    /// File name → SHA-256 (lowercase hex) of every artifact in the run
    /// directory at write time.
    pub artifacts: BTreeMap<String, String>,
}

pub fn sha256_hex(path: &Path) -> CliResult<String> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

/// Builds and writes the manifest for a finished run, hashing the named
/// artifacts relative to `dir`. Returns the manifest it wrote.
pub fn write_manifest(
    dir: &Path,
    config: &RunConfig,
    scaled: Option<ScaledParams>,
    solver_stats: Option<SolverStats>,
    artifact_names: &[String],
) -> CliResult<RunManifest> {
    let mut artifacts = BTreeMap::new();
    for name in artifact_names {
        artifacts.insert(name.clone(), sha256_hex(&dir.join(name))?);
    }
    let manifest = RunManifest {
        created_utc: chrono::Utc::now().to_rfc3339(),
        engine_version: lambda_sr::ENGINE_VERSION.to_string(),
        config: config.clone(),
        config_toml: emit_config(config)?,
        scaled,
        solver_stats,
        artifacts,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(manifest)
}

/// Reads a manifest back and returns the config decoded from its TOML
/// echo, verifying the round trip against the structured copy.
pub fn read_manifest_config(dir: &Path) -> CliResult<RunConfig> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let toml_echo = value
        .get("config_toml")
        .and_then(|v| v.as_str())
        .ok_or_else(|| {
            CliError::Config(format!("{}: missing config_toml field", path.display()))
        })?;
    let from_toml = parse_config(toml_echo)?;
    let structured: RunConfig = serde_json::from_value(
        value
            .get("config")
            .cloned()
            .ok_or_else(|| CliError::Config(format!("{}: missing config field", path.display())))?,
    )
    .map_err(|e| CliError::Config(format!("{}: config field: {e}", path.display())))?;
    if from_toml != structured {
        return Err(CliError::Config(format!(
            "{}: config echo does not round-trip",
            path.display()
        )));
    }
    Ok(from_toml)
}
