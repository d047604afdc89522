//! CSV emission with the config-hash header.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::{CliError, RunConfig};

/// An in-memory table; cells are already formatted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, config_hash: &str) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells");
        format!("# config_sha256={config_hash}\n{body}")
    }
}

pub fn config_path(table: &Path) -> PathBuf {
    table.with_extension("config.toml")
}

/// Writes `table` to `path` (plus its config) or to stdout.
pub fn emit(table: &Table, cfg: &RunConfig, path: Option<&Path>) -> Result<(), CliError> {
    let text = table.render(&cfg.hash());
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            std::fs::write(p, text).map_err(|e| CliError::io(p, e))?;
            let cp = config_path(p);
            std::fs::write(&cp, cfg.to_toml()).map_err(|e| CliError::io(&cp, e))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
