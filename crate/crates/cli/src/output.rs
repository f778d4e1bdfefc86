//! Artifact emission: pretty JSON and versioned CSV.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub const CSV_SCHEMA_VERSION: u32 = 1;

fn write_to(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

pub fn json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    write_to(out, &s)
}

/// 17 significant digits, so values round-trip exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// A CSV table whose first line names the schema version and command.
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<String>,
    pub notes: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&str]) -> Self {
        Table { command, columns: columns.iter().map(|s| s.to_string()).collect(), notes: Vec::new(), rows: Vec::new() }
    }

    pub fn render(&self) -> String {
        let mut s = format!("# neuronlab-csv v{CSV_SCHEMA_VERSION} {}: {}\n", self.command, self.columns.join(","));
        for n in &self.notes {
            s.push_str("# ");
            s.push_str(n);
            s.push('\n');
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        write_to(out, &self.render())
    }
}
