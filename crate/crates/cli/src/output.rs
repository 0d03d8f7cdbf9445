//! Table and report writers.

use crate::config::Format;
use heatlab_core::fmt_csv;
use serde_json::{Map, Value};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// A named numeric table with a fixed header.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_csv(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Rows as objects; non-finite numbers become null.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (k, &x) in self.header.iter().zip(row) {
                        m.insert(
                            k.to_string(),
                            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number),
                        );
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }

    /// Write `<name>.csv` or `<name>.json`; returns the file name.
    pub fn write(&self, dir: &Path, format: Format) -> io::Result<String> {
        let (file, body) = match format {
            Format::Csv => (format!("{}.csv", self.name), self.to_csv()),
            Format::Json => (
                format!("{}.json", self.name),
                serde_json::to_string_pretty(&self.to_json()).map_err(io::Error::other)? + "\n",
            ),
        };
        fs::write(dir.join(&file), body)?;
        Ok(file)
    }
}

pub fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

/// The output directory, with `HEATLAB_OUT` taking precedence.
pub fn resolve_out_dir(configured: &str) -> PathBuf {
    match std::env::var_os("HEATLAB_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(configured),
    }
}
