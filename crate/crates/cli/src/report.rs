//! Result assembly and persistence: per-trial CSV, JSON summary, verdicts.
//!
//! Writes are atomic (temp file + rename). The CSV carries only
//! deterministic content, so identical (config, seed) runs produce identical
//! bytes; wall-clock and timestamps live in the JSON summary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;
use crate::plot::PlotSpec;

pub const CSV_SCHEMA: &str = "lclab-results v1";

/// One pass/fail judgement with its observed value and threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub threshold: f64,
    /// "<=", ">=", "in" ... how observed relates to threshold when passing.
    pub relation: String,
    pub detail: String,
}

impl Verdict {
    pub fn le(name: impl Into<String>, observed: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            pass: observed <= threshold,
            observed,
            threshold,
            relation: "<=".into(),
            detail: detail.into(),
        }
    }

    pub fn ge(name: impl Into<String>, observed: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            pass: observed >= threshold,
            observed,
            threshold,
            relation: ">=".into(),
            detail: detail.into(),
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            pass,
            observed: if pass { 1.0 } else { 0.0 },
            threshold: 1.0,
            relation: "==".into(),
            detail: detail.into(),
        }
    }
}

/// Numeric per-trial table plus aggregates, verdicts and plot payloads.
#[derive(Debug, Clone)]
pub struct ExperimentBody {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub aggregates: Map<String, Value>,
    pub verdicts: Vec<Verdict>,
    pub plots: Vec<PlotSpec>,
}

impl ExperimentBody {
    pub fn new(columns: Vec<&'static str>) -> Self {
        ExperimentBody {
            columns,
            rows: Vec::new(),
            aggregates: Map::new(),
            verdicts: Vec::new(),
            plots: Vec::new(),
        }
    }

    pub fn aggregate(&mut self, key: &str, value: impl Into<Value>) {
        self.aggregates.insert(key.to_string(), value.into());
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Fully assembled result of one run.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub body: ExperimentBody,
    pub wall_clock_secs: f64,
    pub timestamp_unix: u64,
}

impl ExperimentResult {
    pub fn all_pass(&self) -> bool {
        self.body.all_pass()
    }

    /// Deterministic CSV bytes: schema header, config fingerprint, columns,
    /// shortest round-trip decimal rows.
    pub fn csv_bytes(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {CSV_SCHEMA}\n"));
        out.push_str(&format!("# experiment: {}\n", self.config.experiment.as_str()));
        out.push_str(&format!("# seed: {}\n", self.config.seed));
        out.push_str(&format!("# columns: {}\n", self.body.columns.join(",")));
        for row in &self.body.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&format_shortest(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn json_value(&self) -> Value {
        json!({
            "schema": CSV_SCHEMA,
            "experiment": self.config.experiment.as_str(),
            "config": serde_json::to_value(&self.config).expect("config serializes"),
            "columns": self.body.columns,
            "aggregates": Value::Object(self.body.aggregates.clone()),
            "verdicts": self.body.verdicts,
            "all_pass": self.all_pass(),
            "wall_clock_secs": self.wall_clock_secs,
            "timestamp_unix": self.timestamp_unix,
            "code_version": env!("CARGO_PKG_VERSION"),
        })
    }

    /// Writes results.csv and results.json into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join("results.csv");
        atomic_write(&csv_path, self.csv_bytes().as_bytes())?;
        let json_path = dir.join("results.json");
        let text = serde_json::to_string_pretty(&self.json_value()).expect("json serializes");
        atomic_write(&json_path, text.as_bytes())?;
        Ok((csv_path, json_path))
    }
}

/// Rust's float Display is already the shortest round-trip representation;
/// normalize the integer case so columns stay parseable as f64.
fn format_shortest(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Parses a results CSV back into (columns, rows); used by schema tests.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    let mut schema_seen = false;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if rest == CSV_SCHEMA {
                schema_seen = true;
            } else if let Some(cols) = rest.strip_prefix("columns:") {
                columns = cols.trim().split(',').map(|s| s.to_string()).collect();
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|v| v.parse::<f64>()).collect();
        let row = row.map_err(|e| format!("bad row {line:?}: {e}"))?;
        rows.push(row);
    }
    if !schema_seen {
        return Err("missing schema header".to_string());
    }
    if columns.is_empty() {
        return Err("missing columns header".to_string());
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != columns.len() {
            return Err(format!("row {i} has {} fields, expected {}", row.len(), columns.len()));
        }
    }
    Ok((columns, rows))
}
