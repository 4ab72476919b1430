//! Run reports: the serializable record of everything a scenario run
//! decided and measured.
//!
//! A report carries the tool version, the resolved configuration it was
//! produced from, and one entry per executed diagnostic holding verdicts
//! with their numeric certificates, the tolerances that influenced them,
//! optional numeric series for plotting, and the wall-clock time spent.
//! Reports round-trip through JSON, and two runs of the same config and
//! seed produce byte-identical JSON once the timing fields are zeroed.

use serde::{Deserialize, Serialize};

use hardylab::compose::DiagnosticsReport;

use crate::config::ScenarioConfig;

/// One named numeric certificate backing a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub name: String,
    pub value: f64,
}

/// One checked statement with its outcome and certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub check: String,
    pub passed: bool,
    pub certificates: Vec<CertificateEntry>,
}

/// One tolerance that influenced a verdict in the entry it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceEntry {
    pub name: String,
    pub value: f64,
}

/// A named numeric column, e.g. a singular-value spectrum or a sweep of
/// evaluation norms. This is what the plot-data emitter writes out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub name: String,
    pub values: Vec<f64>,
}

/// The record of one executed diagnostic. `passed` means every verdict
/// held and the diagnostic ran to completion; a diagnostic that could not
/// produce its verdicts carries the failure in `error` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticEntry {
    /// The requested diagnostic's name.
    pub diagnostic: String,
    pub passed: bool,
    /// Why the diagnostic could not run, when it could not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub verdicts: Vec<VerdictEntry>,
    pub tolerances: Vec<ToleranceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesEntry>,
    /// Free-form context, e.g. the one-line summary of a battery criterion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    /// Wall-clock seconds; the one field exempt from reproducibility.
    pub seconds: f64,
}

impl DiagnosticEntry {
    /// Converts a library diagnostics bundle into a report entry.
    #[must_use]
    pub fn from_library(diagnostic: &str, report: &DiagnosticsReport) -> Self {
        Self {
            diagnostic: diagnostic.to_string(),
            passed: report.passed(),
            error: None,
            verdicts: report
                .verdicts()
                .iter()
                .map(|v| VerdictEntry {
                    check: v.check().to_string(),
                    passed: v.passed(),
                    certificates: v
                        .certificates()
                        .iter()
                        .map(|(name, value)| CertificateEntry {
                            name: name.clone(),
                            value: *value,
                        })
                        .collect(),
                })
                .collect(),
            tolerances: report
                .tolerances()
                .iter()
                .map(|(name, value)| ToleranceEntry {
                    name: name.clone(),
                    value: *value,
                })
                .collect(),
            series: Vec::new(),
            notes: None,
            seconds: 0.0,
        }
    }

    /// An entry for a diagnostic that could not produce verdicts.
    #[must_use]
    pub fn from_error(diagnostic: &str, message: String) -> Self {
        Self {
            diagnostic: diagnostic.to_string(),
            passed: false,
            error: Some(message),
            verdicts: Vec::new(),
            tolerances: Vec::new(),
            series: Vec::new(),
            notes: None,
            seconds: 0.0,
        }
    }

    /// Looks up a certificate by verdict check and certificate name.
    #[must_use]
    pub fn certificate(&self, check: &str, name: &str) -> Option<f64> {
        self.verdicts
            .iter()
            .find(|v| v.check == check)?
            .certificates
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.value)
    }
}

/// The full, serializable record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Version of the binary that produced the report.
    pub tool_version: String,
    /// The resolved configuration (absent for the certification battery,
    /// which has no scenario config).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ScenarioConfig>,
    pub diagnostics: Vec<DiagnosticEntry>,
}

impl RunReport {
    /// Pretty JSON with stable field order.
    #[must_use]
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports always serialize");
        text.push('\n');
        text
    }

    /// Parses a report back from its JSON form.
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("cannot parse the report: {e}"))
    }

    /// Whether any diagnostic failed to produce its verdicts.
    #[must_use]
    pub fn any_error(&self) -> bool {
        self.diagnostics.iter().any(|d| d.error.is_some())
    }

    /// Whether every executed diagnostic passed all its verdicts.
    #[must_use]
    pub fn all_passed(&self) -> bool {
        self.diagnostics.iter().all(|d| d.passed)
    }

    /// Zeroes the timing fields, leaving exactly the reproducible part.
    pub fn zero_timings(&mut self) {
        for entry in &mut self.diagnostics {
            entry.seconds = 0.0;
        }
    }
}
