//! Machine-readable run reports: one JSON object per line, each record a
//! single check or diagnostic tied to the statement it examines.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// Verifies an identity or inequality at sampled data; gates exit status.
    Check,
    /// Observes behaviour (shooting outcomes, decay trends); never gates.
    Diagnostic,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub check_id: String,
    /// The mathematical statement the record examines.
    pub target: String,
    /// Digest of the record's inputs (hex, truncated).
    pub inputs: String,
    pub values: serde_json::Value,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub kind: RecordKind,
}

impl RunRecord {
    pub fn check(
        check_id: impl Into<String>,
        target: impl Into<String>,
        inputs: &impl Serialize,
        values: serde_json::Value,
        discrepancy: f64,
        tolerance: f64,
    ) -> Self {
        RunRecord {
            check_id: check_id.into(),
            target: target.into(),
            inputs: digest(inputs),
            values,
            discrepancy,
            tolerance,
            pass: discrepancy <= tolerance,
            kind: RecordKind::Check,
        }
    }

    pub fn margin_check(
        check_id: impl Into<String>,
        target: impl Into<String>,
        inputs: &impl Serialize,
        values: serde_json::Value,
        margin: f64,
        tolerance: f64,
    ) -> Self {
        RunRecord {
            check_id: check_id.into(),
            target: target.into(),
            inputs: digest(inputs),
            values,
            discrepancy: (-margin).max(0.0),
            tolerance,
            pass: margin >= -tolerance,
            kind: RecordKind::Check,
        }
    }

    pub fn diagnostic(
        check_id: impl Into<String>,
        target: impl Into<String>,
        inputs: &impl Serialize,
        values: serde_json::Value,
    ) -> Self {
        RunRecord {
            check_id: check_id.into(),
            target: target.into(),
            inputs: digest(inputs),
            values,
            discrepancy: 0.0,
            tolerance: 0.0,
            pass: true,
            kind: RecordKind::Diagnostic,
        }
    }
}

pub fn digest(inputs: &impl Serialize) -> String {
    let text = serde_json::to_string(inputs).unwrap_or_default();
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    out.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn write_jsonl(path: &Path, records: &[RunRecord]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::fs::File::create(path)?;
    for r in records {
        serde_json::to_writer(&mut file, r)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(file, "{}", line.join(","))?;
    }
    Ok(())
}
