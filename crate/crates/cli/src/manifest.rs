//! `manifest.json`: everything needed to replay a run.

use casimir_core::analytics::PowerLawFit;
use casimir_core::dynamics::Diagnostics;
use casimir_core::sweep::{ResonanceSummary, SweepParam};
use casimir_core::Params;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "casimir";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 over `"blob <len>\0" + content`, the object-hash layout git uses.
pub fn content_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_path: Option<String>,
    pub config_hash: String,
    pub overrides: Vec<String>,
    pub params: Params,
    pub dt: f64,
    pub record_stride: usize,
    pub wall_clock_seconds: f64,
    /// `ok` or `failed`.
    pub status: String,
    pub error: Option<String>,
    /// Last time the state was finite, for an aborted integration.
    pub last_valid_t: Option<f64>,
    pub diagnostics: Option<Diagnostics>,
    pub sweep: Option<SweepManifest>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub observable_time_au: f64,
    pub workers: usize,
    pub failed_rows: usize,
    pub fit_window: Option<std::ops::Range<usize>>,
    pub fit: Option<PowerLawFit>,
    pub fit_error: Option<String>,
    pub resonance: Option<ResonanceSummary>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_path: Option<String>,
        config_text: &str,
        overrides: &[String],
        params: &Params,
    ) -> Self {
        RunManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config_path,
            config_hash: content_hash(config_text.as_bytes()),
            overrides: overrides.to_vec(),
            params: params.clone(),
            dt: params.dt,
            record_stride: params.record_stride,
            wall_clock_seconds: 0.0,
            status: "ok".into(),
            error: None,
            last_valid_t: None,
            diagnostics: None,
            sweep: None,
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("manifest serializes");
        v.push(b'\n');
        v
    }
}
