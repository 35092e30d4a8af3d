//! CSV tables and the JSON summary.
//!
//! Every table has the columns `<abscissa>,value,stderr,n`, LF line
//! endings and values in `{:.16e}` form (17 significant digits, no locale).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rrmdqw_core::Series;
use serde::Serialize;

use crate::config::{ExperimentDoc, Format};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub x: i64,
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    /// File stem.
    pub name: String,
    /// Header of the first column: `t`, `r` or `t_R`.
    pub abscissa: &'static str,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn from_series(name: impl Into<String>, abscissa: &'static str, series: &Series, n: u64) -> Self {
        Table {
            name: name.into(),
            abscissa,
            rows: series
                .points()
                .iter()
                .map(|p| Row { x: p.t as i64, value: p.value, stderr: p.stderr, n })
                .collect(),
        }
    }

    pub fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record([self.abscissa, "value", "stderr", "n"])?;
        for r in &self.rows {
            w.write_record([r.x.to_string(), fmt_f64(r.value), fmt_f64(r.stderr), r.n.to_string()])?;
        }
        Ok(w.into_inner()?)
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Everything a subcommand produced.
#[derive(Debug, Clone, Serialize)]
pub struct Output {
    pub command: &'static str,
    /// The resolved document, seed included; loading it back reproduces
    /// the run.
    pub config: ExperimentDoc,
    pub base_seed: u64,
    pub derived: serde_json::Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

#[derive(Serialize)]
struct Summary<'a> {
    #[serde(flatten)]
    output: &'a Output,
    files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tables: Option<&'a [Table]>,
}

impl Output {
    pub fn new(command: &'static str, config: &ExperimentDoc, derived: serde_json::Value, tables: Vec<Table>) -> Self {
        Output { command, config: config.clone(), base_seed: config.base_seed(), derived, tables }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Summary document; with `inline_tables` the tables are embedded.
    pub fn summary_json(&self, files: Vec<String>, inline_tables: bool) -> anyhow::Result<String> {
        let summary = Summary { output: self, files, tables: inline_tables.then_some(self.tables.as_slice()) };
        Ok(serde_json::to_string_pretty(&summary)? + "\n")
    }

    /// Writes the tables and `summary.json` under `dir`; returns the paths
    /// written.
    pub fn write(&self, dir: &Path, format: Format) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        let mut files = Vec::new();
        if format == Format::Csv {
            for t in &self.tables {
                let name = format!("{}.csv", t.name);
                let path = dir.join(&name);
                fs::write(&path, t.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
                files.push(name);
                written.push(path);
            }
        }
        let path = dir.join("summary.json");
        fs::write(&path, self.summary_json(files, format == Format::Json)?)
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let s = Series::from_values(&[0.0, 2.0], &[1.0, 0.1]);
        let csv = Table::from_series("x", "t", &s, 3).to_csv().unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "t,value,stderr,n\n0,1.0000000000000000e0,0.0000000000000000e0,3\n2,1.0000000000000001e-1,0.0000000000000000e0,3\n"
        );
    }

    #[test]
    fn full_precision_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-17, 123456.789e200] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
