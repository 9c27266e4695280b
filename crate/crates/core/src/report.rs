//! Byte-stable JSON and CSV emission.
//!
//! JSON objects are written with sorted keys and every non-integer number as
//! `{:.11e}` (12 significant digits). CSV files start with one comment line
//! `# config_digest=<hex>,master_seed=<u64>` followed by the header row.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Fixed float format with 12 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Serializes to canonical JSON text (two-space indentation, trailing newline).
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), Value::String((*k).clone()));
                write_value(&map[*k], indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> CsvTable {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, meta: &RunMeta) -> String {
        let mut out = format!(
            "# config_digest={},master_seed={}\n{}\n",
            meta.config_digest,
            meta.master_seed,
            self.header.join(",")
        );
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Provenance stamped on every artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunMeta {
    pub command: String,
    pub config_digest: String,
    pub master_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: &'a RunMeta,
    passed: bool,
    report: &'a T,
}

/// A finished report: its JSON body plus an optional flat CSV detail table.
pub struct Report<'a, T: Serialize> {
    pub name: &'a str,
    pub meta: &'a RunMeta,
    pub passed: bool,
    pub body: &'a T,
    pub detail: Option<&'a CsvTable>,
}

impl<T: Serialize> Report<'_, T> {
    pub fn render_json(&self) -> Result<String> {
        to_canonical_json(&Envelope {
            meta: self.meta,
            passed: self.passed,
            report: self.body,
        })
    }
}

/// Writes `<dir>/<name>.json` or `<dir>/<name>.csv` and returns the path.
/// Asking for CSV on a report without a detail table writes a header-only file.
pub fn emit_report<T: Serialize>(report: &Report<'_, T>, format: Format, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let (path, text) = match format {
        Format::Json => (dir.join(format!("{}.json", report.name)), report.render_json()?),
        Format::Csv => {
            let empty = CsvTable::default();
            let table = report.detail.unwrap_or(&empty);
            (dir.join(format!("{}.csv", report.name)), table.render(report.meta))
        }
    };
    fs::write(&path, text)?;
    Ok(path)
}
