//! Run summaries and CSV output.
//!
//! A summary is structured text in four parts: `[run]` (command, version,
//! wall clock), `[config]` (the effective configuration), `[results]` and
//! zero or more `[[record]]` tables. Everything except `[run]` is a pure
//! function of the configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// 17 significant digits, enough to round-trip an f64.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn list<I: IntoIterator<Item = String>>(items: I) -> String {
    format!("[{}]", items.into_iter().collect::<Vec<_>>().join(", "))
}

pub struct Report {
    command: &'static str,
    config: String,
    results: Vec<(String, String)>,
    records: Vec<Vec<(String, String)>>,
    tables: Vec<Table>,
}

/// One CSV file.
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

impl Report {
    pub fn new(command: &'static str, config: String) -> Self {
        Report {
            command,
            config,
            results: Vec::new(),
            records: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn int(&mut self, key: impl Into<String>, v: impl std::fmt::Display) {
        self.results.push((key.into(), v.to_string()));
    }

    pub fn float(&mut self, key: impl Into<String>, v: f64) {
        self.results.push((key.into(), float(v)));
    }

    pub fn text(&mut self, key: impl Into<String>, v: &str) {
        self.results.push((key.into(), format!("{v:?}")));
    }

    pub fn floats(&mut self, key: impl Into<String>, vs: &[f64]) {
        self.results
            .push((key.into(), list(vs.iter().map(|&v| float(v)))));
    }

    pub fn ints<T: std::fmt::Display>(&mut self, key: impl Into<String>, vs: &[T]) {
        self.results
            .push((key.into(), list(vs.iter().map(|v| v.to_string()))));
    }

    pub fn record(&mut self, fields: Vec<(&str, String)>) {
        self.records.push(
            fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        );
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    #[cfg(test)]
    /// Value of a result key as rendered.
    pub fn result(&self, key: &str) -> Option<&str> {
        self.results
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Renders the summary; `files` lists the CSVs written alongside it.
    pub fn render(&self, wall_clock: f64, files: &[PathBuf]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "command = {:?}", self.command);
        let _ = writeln!(s, "version = {:?}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "wall_clock_seconds = {}", float(wall_clock));
        let _ = writeln!(
            s,
            "files = {}",
            list(
                files
                    .iter()
                    .map(|f| format!("{:?}", f.display().to_string()))
            )
        );
        let _ = writeln!(s, "\n[config]");
        s.push_str(&self.config);
        let _ = writeln!(s, "\n[results]");
        for (k, v) in &self.results {
            let _ = writeln!(s, "{k} = {v}");
        }
        for rec in &self.records {
            let _ = writeln!(s, "\n[[record]]");
            for (k, v) in rec {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    /// Writes every table as `<dir>/<name>.csv`.
    pub fn write_tables(&self, dir: &Path) -> Result<Vec<PathBuf>, String> {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            let io = |e: csv::Error| format!("{}: {e}", path.display());
            let mut w = csv::Writer::from_path(&path).map_err(io)?;
            w.write_record(&t.header).map_err(io)?;
            for row in &t.rows {
                w.write_record(row).map_err(io)?;
            }
            w.flush().map_err(|e| format!("{}: {e}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            6.0 / std::f64::consts::PI.powi(2),
            1e-300,
            -2.5e17,
        ] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn render_sections() {
        let mut r = Report::new("sieve", "limit = 100\n".into());
        r.int("mertens[100]", 1);
        r.floats("xs", &[0.5]);
        r.record(vec![("j", "0".into())]);
        let text = r.render(0.25, &[]);
        assert!(text.starts_with("[run]\ncommand = \"sieve\"\n"));
        assert!(text.contains("[config]\nlimit = 100\n"));
        assert!(text.contains("mertens[100] = 1\nxs = [5.0000000000000000e-1]\n"));
        assert!(text.contains("[[record]]\nj = 0\n"));
        assert_eq!(r.result("mertens[100]"), Some("1"));
    }
}
