//! CSV and JSON emission. Every file carries the tool version and the canonical config.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to round-trip any binary64.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV body preceded by `#` lines for version, config and any warnings.
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    comments: Vec<String>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            comments: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.header.len());
        self.rows.push(fields);
    }

    pub fn render(&self, cfg: &RunConfig) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "# lchi {VERSION}")?;
        for line in cfg.canonical().lines() {
            writeln!(out, "# config {line}")?;
        }
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        drop(w);
        Ok(out)
    }
}

/// Pretty JSON object: the payload fields plus `lchi_version` and `config`.
pub fn json_document<T: Serialize>(payload: &T, cfg: &RunConfig) -> Result<Vec<u8>> {
    let mut doc = Map::new();
    doc.insert("lchi_version".into(), Value::String(VERSION.into()));
    doc.insert("config".into(), Value::String(cfg.canonical()));
    match serde_json::to_value(payload)? {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    let mut bytes = serde_json::to_vec_pretty(&Value::Object(doc))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn emit(bytes: &[u8], out: Option<&str>) -> Result<()> {
    match out {
        Some(path) => fs::write(Path::new(path), bytes).with_context(|| format!("cannot write {path}")),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).context("cannot write to stdout")?;
            stdout.flush().context("cannot write to stdout")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 14.134725141734693, -2.5e-300, f64::MAX, 5e-324] {
            assert_eq!(float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_has_preamble_then_header() {
        let cfg = RunConfig::parse("q=4\nchi=1\n").unwrap();
        let mut t = CsvTable::new(&["a", "b"]);
        t.comment("warning: none");
        t.row(vec!["1".into(), float(0.5)]);
        let text = String::from_utf8(t.render(&cfg).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# lchi {VERSION}"));
        assert_eq!(lines[1], "# config chi=1");
        assert_eq!(lines[3], "# warning: none");
        assert_eq!(lines[4], "a,b");
        assert_eq!(lines[5], "1,5.0000000000000000e-1");
    }
}
