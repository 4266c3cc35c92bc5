//! CSV emission shared by the subcommands: `#`-prefixed metadata lines, a
//! header row, then data rows.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};

pub struct Report {
    metadata: Vec<String>,
    header: String,
    rows: Vec<String>,
}

impl Report {
    pub fn new(header: &str) -> Report {
        Report {
            metadata: vec![format!("# build: {}", env!("PARSKETCH_BUILD"))],
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.metadata.push(format!("# {key}: {value}"));
    }

    pub fn row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for m in &self.metadata {
            out.push_str(m);
            out.push('\n');
        }
        out.push_str(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        let rendered = self.render();
        match out {
            Some(path) => std::fs::write(path, rendered).map_err(|e| {
                CliError::Config(format!("cannot write {}: {e}", path.display()))
            }),
            None => {
                std::io::stdout()
                    .write_all(rendered.as_bytes())
                    .map_err(|e| CliError::Internal(format!("stdout: {e}")))
            }
        }
    }
}

/// Seconds with enough digits to be useful, words as plain integers.
pub fn sec(v: f64) -> String {
    format!("{v:.6}")
}
