use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::{write_file, CliError, CliResult};

/// How a check value is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass when `value <= threshold`.
    AtMost,
    /// Pass when `value >= threshold`.
    AtLeast,
    /// Pass when `value == threshold` exactly.
    Exactly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl CheckRecord {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> CheckRecord {
        CheckRecord::new(name, value, threshold, Comparison::AtMost)
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> CheckRecord {
        CheckRecord::new(name, value, threshold, Comparison::AtLeast)
    }

    pub fn exactly(name: impl Into<String>, value: f64, threshold: f64) -> CheckRecord {
        CheckRecord::new(name, value, threshold, Comparison::Exactly)
    }

    /// A yes/no check, recorded as `1` (true) against `1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> CheckRecord {
        CheckRecord::exactly(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    fn new(name: impl Into<String>, value: f64, threshold: f64, comparison: Comparison) -> CheckRecord {
        let pass = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Exactly => value == threshold,
        };
        CheckRecord { name: name.into(), value, threshold, comparison, pass }
    }
}

/// The deterministic part of a report: everything except timings. Its
/// compact JSON is what the content hash covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments that affect the result (output paths are left out).
    pub arguments: BTreeMap<String, Value>,
    pub config: Value,
    pub config_hash: String,
    pub checks: Vec<CheckRecord>,
    pub results: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub report: ReportBody,
    pub content_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunReport {
    /// Builds a report; every check name must be unique.
    pub fn new(
        command: &str,
        arguments: BTreeMap<String, Value>,
        config: Value,
        checks: Vec<CheckRecord>,
        results: Value,
    ) -> CliResult<RunReport> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &checks {
            if !seen.insert(c.name.as_str()) {
                return Err(CliError::Validation(format!("check `{}` was requested twice", c.name)));
            }
        }
        let config_hash = sha256_hex(serde_json::to_string(&config).expect("json value").as_bytes());
        let report = ReportBody {
            tool: "caloron".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            arguments,
            config,
            config_hash,
            checks,
            results,
        };
        let content_hash = sha256_hex(body_json(&report).as_bytes());
        Ok(RunReport { report, content_hash, timings: None })
    }

    pub fn with_timings(mut self, timings: BTreeMap<String, f64>) -> RunReport {
        self.timings = Some(timings);
        self
    }

    pub fn all_pass(&self) -> bool {
        self.report.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&CheckRecord> {
        self.report.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_file(path, &self.to_json())
    }

    /// Recomputes the hash of the body.
    pub fn verify_hash(&self) -> bool {
        sha256_hex(body_json(&self.report).as_bytes()) == self.content_hash
    }
}

/// Compact JSON of the hash-covered section.
pub fn body_json(body: &ReportBody) -> String {
    serde_json::to_string(body).expect("report body serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_timings() {
        let a = RunReport::new("x", BTreeMap::new(), Value::Null, vec![CheckRecord::at_most("c", 1.0, 2.0)], Value::Null).unwrap();
        let b = a.clone().with_timings(BTreeMap::from([("total_s".to_string(), 1.5)]));
        assert_eq!(a.content_hash, b.content_hash);
        assert!(b.verify_hash());
    }

    #[test]
    fn duplicate_checks_rejected() {
        let c = CheckRecord::at_most("c", 1.0, 2.0);
        assert!(RunReport::new("x", BTreeMap::new(), Value::Null, vec![c.clone(), c], Value::Null).is_err());
    }

    #[test]
    fn comparisons() {
        assert!(CheckRecord::at_least("r", 3.6, 3.5).pass);
        assert!(!CheckRecord::at_least("r", f64::NAN, 3.5).pass);
        assert!(CheckRecord::exactly("e", 0.0, 0.0).pass);
        assert!(!CheckRecord::holds("h", false).pass);
    }
}
