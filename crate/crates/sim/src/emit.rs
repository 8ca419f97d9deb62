//! CSV/JSON emission. Both formats carry the same columns and a metadata
//! block; CSV puts the metadata in leading `# key: value` comment lines.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, SimError};
use crate::experiments::{FerPoint, RocPoint, SearchReport, TrialRecord};
use crate::stats::EmpiricalCdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub config_hash: String,
    pub tool_version: String,
    /// Extra `(key, value)` pairs such as low-confidence flags.
    #[serde(default)]
    pub notes: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(seed: u64, config_hash: impl Into<String>) -> Self {
        Metadata {
            seed,
            config_hash: config_hash.into(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.notes.push((key.into(), value.to_string()));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            // serde_json writes the shortest string that parses back to the
            // same f64; non-finite values become null.
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(v) => Value::String(v.clone()),
        }
    }
}

/// 17 significant digits: enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, meta: &Metadata) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# seed: {}", meta.seed);
        let _ = writeln!(out, "# config_hash: {}", meta.config_hash);
        let _ = writeln!(out, "# tool_version: {}", meta.tool_version);
        for (k, v) in &meta.notes {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, meta: &Metadata) -> Result<String> {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::json).collect())
            .collect();
        let doc = serde_json::json!({
            "metadata": meta,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, meta: &Metadata, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv(meta)),
            Format::Json => self.to_json(meta),
        }
    }

    pub fn write(&self, meta: &Metadata, format: Format, path: &Path) -> Result<()> {
        let text = self.render(meta, format)?;
        std::fs::write(path, text).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Parsed form of an emitted JSON document.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct JsonDoc {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

pub fn parse_json(text: &str) -> Result<JsonDoc> {
    Ok(serde_json::from_str(text)?)
}

pub fn records_table(records: &[TrialRecord]) -> Table {
    let mut t = Table::new(&[
        "trial_index",
        "scenario",
        "ebn0_db",
        "metric_d",
        "decodable",
        "detector_hypothesis",
    ]);
    for r in records {
        t.push(vec![
            Cell::Int(r.trial_index),
            Cell::Text(r.scenario.name().into()),
            Cell::Float(r.ebn0_db),
            Cell::Float(r.metric_d),
            Cell::Bool(r.decodable),
            Cell::Text(format!("{:?}", r.detector_hypothesis)),
        ]);
    }
    t
}

/// One row per CDF step.
pub fn cdf_table(cdfs: &[(String, f64, EmpiricalCdf)]) -> Table {
    let mut t = Table::new(&["scenario", "ebn0_db", "metric_d", "cdf"]);
    for (label, ebn0, cdf) in cdfs {
        for (x, p) in cdf.steps() {
            t.push(vec![
                Cell::Text(label.clone()),
                Cell::Float(*ebn0),
                Cell::Float(x),
                Cell::Float(p),
            ]);
        }
    }
    t
}

pub fn roc_table(points: &[RocPoint]) -> Table {
    let mut t = Table::new(&["threshold_d", "p_miss", "p_fa", "n_miss", "n_fa", "n_f1", "n_f0"]);
    for p in points {
        t.push(vec![
            Cell::Float(p.threshold_d),
            Cell::Float(p.p_miss),
            Cell::Float(p.p_fa),
            Cell::Int(p.n_miss),
            Cell::Int(p.n_fa),
            Cell::Int(p.n_f1),
            Cell::Int(p.n_f0),
        ]);
    }
    t
}

pub fn fer_table(decoder: &str, points: &[FerPoint]) -> Table {
    let mut t = Table::new(&[
        "ebn0_db",
        "decoder",
        "fer",
        "ber",
        "frames",
        "frame_errors",
        "bit_errors",
    ]);
    for p in points {
        t.push(vec![
            Cell::Float(p.ebn0_db),
            Cell::Text(decoder.into()),
            Cell::Float(p.fer),
            Cell::Float(p.ber),
            Cell::Int(p.frames),
            Cell::Int(p.frame_errors),
            Cell::Int(p.bit_errors),
        ]);
    }
    t
}

pub fn search_table(report: &SearchReport) -> Table {
    let mut t = Table::new(&[
        "grids",
        "n_candidates",
        "n_valid",
        "threshold_d",
        "retained",
        "retained_per_grid",
        "retention_regtx",
        "retention_rndtx",
        "retention_notx",
        "grids_all_valid_retained",
    ]);
    t.push(vec![
        Cell::Int(report.grids),
        Cell::Int(report.n_candidates),
        Cell::Int(report.n_valid),
        Cell::Float(report.threshold_d),
        Cell::Int(report.retained),
        Cell::Float(report.retained_per_grid),
        Cell::Float(report.retention_regtx),
        Cell::Float(report.retention_rndtx),
        Cell::Float(report.retention_notx),
        Cell::Int(report.grids_all_valid_retained),
    ]);
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Metadata {
        Metadata::new(7, "abc").note("low_confidence", "fer@3dB")
    }

    #[test]
    fn empty_roc_is_header_only() {
        let csv = roc_table(&[]).to_csv(&meta());
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, ["threshold_d,p_miss,p_fa,n_miss,n_fa,n_f1,n_f0"]);
        assert!(csv.contains("# seed: 7\n# config_hash: abc\n"));
        assert!(csv.contains("# low_confidence: fer@3dB\n"));
    }

    #[test]
    fn csv_floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0, f64::MAX] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
            let digits = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
            assert!(digits >= 9);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut t = Table::new(&["x", "n", "ok", "s"]);
        let xs = [0.1, 1.0 / 3.0, 7.0e-12, -4.0];
        for (i, &x) in xs.iter().enumerate() {
            t.push(vec![Cell::Float(x), Cell::Int(i as u64), Cell::Bool(i % 2 == 0), Cell::Text("notx".into())]);
        }
        let doc = parse_json(&t.to_json(&meta()).unwrap()).unwrap();
        assert_eq!(doc.metadata, meta());
        assert_eq!(doc.columns, t.columns);
        for (row, &x) in doc.rows.iter().zip(&xs) {
            assert_eq!(row[0].as_f64().unwrap().to_bits(), x.to_bits());
        }
    }
}
