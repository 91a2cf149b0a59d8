//! Tables and summaries written as CSV (one file per table) or as one JSON
//! document. Every file carries the resolved config and its hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len(), "table {}", self.name);
        self.rows.push(row);
    }
}

/// Output of one subcommand.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub summary: BTreeMap<String, Value>,
}

impl Report {
    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.to_string(), v.into());
    }
}

/// Float as JSON; non-finite values become strings so the output stays valid.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(format!("{x}"))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Writes the report for `command`; returns the paths written.
pub fn write(report: &Report, command: &str, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    let (config_json, hash) = cfg.canonical();
    let mut written = Vec::new();
    match cfg.format() {
        Format::Csv => {
            let meta = format!("# config_hash={hash} config={config_json}\n");
            for t in &report.tables {
                let mut s = meta.clone();
                s.push_str(&t.header.join(","));
                s.push('\n');
                for r in &t.rows {
                    let line: Vec<String> = r.iter().map(cell).collect();
                    s.push_str(&line.join(","));
                    s.push('\n');
                }
                written.push(put(&dir, &format!("{command}_{}.csv", t.name), &s)?);
            }
            let mut s = meta;
            s.push_str("key,value\n");
            for (k, v) in &report.summary {
                s.push_str(&format!("{k},{}\n", cell(v)));
            }
            written.push(put(&dir, &format!("{command}_summary.csv"), &s)?);
        }
        Format::Json => {
            let mut tables = Map::new();
            for t in &report.tables {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| Value::Object(t.header.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                tables.insert(t.name.to_string(), Value::Array(rows));
            }
            let config: Value = serde_json::from_str(&config_json).expect("config is JSON");
            let doc = json!({
                "command": command,
                "config_hash": hash,
                "config": config,
                "summary": report.summary,
                "tables": tables,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            written.push(put(&dir, &format!("{command}.json"), &s)?);
        }
    }
    Ok(written)
}

fn put(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    let p = dir.join(name);
    fs::write(&p, content).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
    Ok(p)
}
