use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A table with named columns; cells that do not apply are `None`.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<Cell>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into),
            Cell::Int(i) => (*i).into(),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Option<Cell>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns).map_err(CliError::io)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|c| c.as_ref().map(Cell::csv).unwrap_or_default()))
                .map_err(CliError::io)?;
        }
        out.flush().map_err(CliError::io)
    }

    fn write_json<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.clone(), c.as_ref().map_or(serde_json::Value::Null, Cell::json)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut w, &rows).map_err(CliError::io)?;
        writeln!(w).map_err(CliError::io)
    }

    pub fn write(&self, out: Option<&Path>, format: Format) -> Result<(), CliError> {
        match out {
            Some(path) => {
                let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(file);
                match format {
                    Format::Csv => self.write_csv(&mut w)?,
                    Format::Json => self.write_json(&mut w)?,
                }
                w.flush().map_err(CliError::io)
            }
            None => {
                let stdout = std::io::stdout();
                let lock = stdout.lock();
                match format {
                    Format::Csv => self.write_csv(lock),
                    Format::Json => self.write_json(lock),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub d_nm: f64,
    pub pressure_mpa: f64,
    pub numeric_error_mpa: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub library_version: &'static str,
    pub config_sha256: Vec<String>,
    pub error_budget: f64,
    pub points: Vec<PointRecord>,
}

/// `<out>.manifest.json` next to the data file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn write_manifest(out: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let path = manifest_path(out);
    let mut text = serde_json::to_string_pretty(manifest).map_err(CliError::io)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
