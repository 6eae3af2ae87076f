use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use rach_core::Scenario;

use crate::error::CliError;

/// Everything needed to reproduce a command: what ran, on which scenario, with
/// which parameters, and what it produced.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub scenario_path: String,
    /// SHA-256 of the scenario's canonical TOML form.
    pub scenario_sha256: String,
    pub parameters: Value,
    pub results: Value,
}

impl RunReport {
    pub fn new(
        command: &'static str,
        scenario_path: String,
        scenario: &Scenario,
        parameters: Value,
        results: Value,
    ) -> Result<Self, CliError> {
        Ok(Self {
            tool: "rach",
            version: env!("CARGO_PKG_VERSION"),
            command,
            scenario_path,
            scenario_sha256: fingerprint(scenario)?,
            parameters,
            results,
        })
    }

    pub fn header(&self) -> String {
        format!(
            "{} {} | scenario {} | sha256 {}",
            self.tool, self.command, self.scenario_path, self.scenario_sha256
        )
    }
}

/// Fingerprint of the validated scenario. Formatting and comments in the
/// source file do not change it.
pub fn fingerprint(scenario: &Scenario) -> Result<String, CliError> {
    let canonical = scenario.to_toml()?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}
