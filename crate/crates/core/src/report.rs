//! CSV and JSON report emission.
//!
//! CSV bodies are byte-stable for a fixed configuration: floats carry 12
//! significant digits, lines end in `\n`, and anything run-dependent
//! (timestamp, wall time) lives in `#` comment lines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// A float cell with 12 significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0.00000000000e0"
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Header row and data rows only.
    pub fn body(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| escape(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push_str(&self.body());
        out
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Drops `#` lines, leaving the part that must be reproducible.
pub fn strip_comments(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub fn timestamp() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%S%3fZ").to_string()
}

/// Writes `<sub>-<timestamp>-<seed>.<ext>` under `dir`, never clobbering an
/// existing file.
pub fn write_report(dir: &Path, sub: &str, stamp: &str, seed: u64, ext: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut path = dir.join(format!("{sub}-{stamp}-{seed}.{ext}"));
    let mut k = 1;
    while path.exists() {
        path = dir.join(format!("{sub}-{stamp}-{seed}-{k}.{ext}"));
        k += 1;
    }
    fs::write(&path, content)?;
    Ok(path)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
