//! JSON documents written by the commands.
//!
//! Everything needed to repeat a run (config, seed, input digests) is echoed;
//! `timings` is the only field that varies between identical invocations.

use std::fs;
use std::path::Path;

use mps_core::{EvaluationReport, MpsConfig, MpsResult, RiskVerdict, SyntheticScenario};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(role: &str, path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    /// `matrix` or `traces`.
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<String>,
    pub files: Vec<FileDigest>,
    pub prompt_count: usize,
    pub model_count: usize,
    pub model_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseSummary {
    pub suspect_id: String,
    pub control_ids: Vec<String>,
    pub is_provenance: bool,
    pub suspect_excluded_at: Option<usize>,
    pub control_contamination: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub risk: RiskVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairwise: Option<PairwiseSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: String,
    pub command: String,
    pub config: MpsConfig,
    pub input: InputDigest,
    pub ni_score: f64,
    pub ni_testable: bool,
    /// Absent for `ni-score`, which stops after the first test.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<MpsResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Verdicts>,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema_version: String,
    pub command: String,
    pub config: MpsConfig,
    pub scenario: SyntheticScenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_file: Option<FileDigest>,
    pub evaluation: EvaluationReport,
    pub timings: Timings,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
    s.push('\n');
    s
}
