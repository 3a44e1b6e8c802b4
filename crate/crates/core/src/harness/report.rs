use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of one suite run. Serializes to a flat JSON object with exactly
/// these fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub suite: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest absolute residual seen across all trials. Non-finite values
    /// are clamped to `f64::MAX` so the report stays valid JSON.
    pub worst_residual: f64,
    pub seed: u64,
    pub notes: String,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report fields are always serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Parses newline-delimited reports, skipping blank lines.
pub fn parse_report_lines(text: &str) -> Result<Vec<VerificationReport>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(VerificationReport::from_json)
        .collect()
}
