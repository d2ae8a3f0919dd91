//! JSON summaries and CSV tables written by every command.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

pub const ARTIFACT: &str = "ringsqueeze";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const FIDELITY_CONVENTION: &str = "probability (squared overlap): \
F = exp(-d^T (s1 + s2)^-1 d / 2) / sqrt(det(s1 + s2)), vacuum covariance I/2, \
at least one state pure";

/// Outcome of a command, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// Finished, with a diagnostic worth reading (e.g. non-orthogonal modes).
    Warning,
    /// Fidelity under threshold, or an oracle discrepancy above tolerance.
    BelowThreshold,
    ConfigError,
    Rejected,
    NonPhysical,
    Truncation,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok | Status::Warning => 0,
            Status::BelowThreshold => 1,
            Status::ConfigError => 2,
            Status::Rejected => 3,
            Status::NonPhysical => 4,
            Status::Truncation => 5,
        }
    }
}

impl From<&ringsqueeze::Error> for Status {
    fn from(e: &ringsqueeze::Error) -> Self {
        use ringsqueeze::Error as E;
        match e {
            E::Stability(_) | E::NotHurwitz { .. } | E::InvalidParameter(_) | E::ZeroDetuning => Status::Rejected,
            E::NonPhysical(_) | E::NonFinite(_) => Status::NonPhysical,
            E::Truncation { .. } => Status::Truncation,
            E::DimensionMismatch { .. }
            | E::UnknownMode(_)
            | E::DuplicateMode(_)
            | E::EmptySelection
            | E::BasisMismatch
            | E::NotQuadratic => Status::ConfigError,
        }
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// CSV table; every cell is already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, row: impl IntoIterator<Item = f64>) {
        self.rows.push(row.into_iter().map(num).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub status: Status,
    /// Machine-readable reason when `status` is not `Ok`.
    pub reason: Option<String>,
    /// Named parameter relations behind the reported values.
    pub sources: Value,
    pub results: Value,
    pub table: Option<Table>,
}

impl Report {
    pub fn new(command: &'static str, results: Value) -> Self {
        Report { command, status: Status::Ok, reason: None, sources: json!({}), results, table: None }
    }

    pub fn failed(command: &'static str, status: Status, reason: String) -> Self {
        Report { status, reason: Some(reason), ..Report::new(command, Value::Null) }
    }

    pub fn exit_code(&self) -> u8 {
        self.status.exit_code()
    }

    /// Full JSON document. Object keys come out sorted, so identical inputs
    /// give identical bytes once the timestamp is left out.
    pub fn to_json(&self, config: &Value, timestamp: Option<u64>) -> Value {
        let mut doc = json!({
            "artifact": ARTIFACT,
            "version": VERSION,
            "command": self.command,
            "config": config,
            "fidelity_convention": FIDELITY_CONVENTION,
            "status": self.status,
            "exit_code": self.exit_code(),
            "reason": self.reason,
            "sources": self.sources,
            "results": self.results,
        });
        if let Some(t) = timestamp {
            doc["timestamp"] = json!(t);
        }
        doc
    }

    /// Writes `<command>.json` and, when present, `<command>.csv` into `dir`.
    pub fn write(&self, dir: &Path, config: &Value, timestamp: bool) -> Result<Vec<PathBuf>, crate::CliError> {
        fs::create_dir_all(dir)?;
        let ts = timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        let json_path = dir.join(format!("{}.json", self.command));
        let mut text = serde_json::to_string_pretty(&self.to_json(config, ts))?;
        text.push('\n');
        fs::write(&json_path, text)?;
        let mut out = vec![json_path];
        let csv_path = dir.join(format!("{}.csv", self.command));
        match &self.table {
            Some(t) => {
                t.write(&csv_path)?;
                out.push(csv_path);
            }
            // a table left over from an earlier run would no longer match the JSON
            None if csv_path.exists() => fs::remove_file(&csv_path)?,
            None => {}
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_timestamp_optional() {
        let r = Report::new("modes", json!({"b": 1, "a": 2}));
        let s = serde_json::to_string(&r.to_json(&Value::Null, None)).unwrap();
        assert!(!s.contains("timestamp"));
        assert!(s.find("\"artifact\"").unwrap() < s.find("\"command\"").unwrap());
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(r.to_json(&Value::Null, Some(7))["timestamp"] == 7);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Ok.exit_code(), 0);
        assert_eq!(Status::Warning.exit_code(), 0);
        assert_eq!(Status::BelowThreshold.exit_code(), 1);
        assert_eq!(Status::from(&ringsqueeze::Error::Stability("x".into())).exit_code(), 3);
        assert_eq!(Status::from(&ringsqueeze::Error::Truncation { population: 1.0, threshold: 0.0 }).exit_code(), 5);
    }
}
