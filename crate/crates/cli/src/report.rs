//! CSV tables and flat JSON summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// 17 significant digits, round-trip exact.
pub fn format_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Self::default() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    /// Records a float, mapping non-finite values to strings JSON can hold.
    pub fn put_num(&mut self, key: &str, x: f64) {
        let v = serde_json::Number::from_f64(x).map(Value::Number).unwrap_or_else(|| Value::String(format_num(x)));
        self.summary.insert(key.to_string(), v);
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), ok, detail: detail.into() });
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }

    pub fn csv(&self, command: &str, cfg: &RunConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# vanhove {command}");
        let _ = writeln!(out, "# config_sha256={}", cfg.hash());
        let _ = writeln!(out, "# seed={}", cfg.seed);
        for (k, v) in cfg.entries() {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn json(&self, command: &str, cfg: &RunConfig) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), command.into());
        m.insert("config_sha256".into(), cfg.hash().into());
        m.insert("seed".into(), cfg.seed.into());
        for (k, v) in &self.summary {
            m.insert(k.clone(), v.clone());
        }
        let failed: Vec<&str> = self.failed().iter().map(|c| c.name.as_str()).collect();
        m.insert("pass".into(), failed.is_empty().into());
        m.insert("failed".into(), failed.join(";").into());
        Value::Object(m)
    }

    /// Writes `<dir>/<command>.csv` and `<dir>/<command>.json`.
    pub fn write(&self, dir: &Path, command: &str, cfg: &RunConfig) -> Result<(PathBuf, PathBuf), CliError> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{command}.csv"));
        let json = dir.join(format!("{command}.json"));
        fs::write(&csv, self.csv(command, cfg))?;
        let mut text = serde_json::to_string_pretty(&self.json(command, cfg)).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(&json, text)?;
        Ok((csv, json))
    }
}
