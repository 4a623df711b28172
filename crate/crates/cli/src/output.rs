//! Tabular and summary outputs. Every file is written to a temporary file in
//! the output directory and renamed into place.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// Silent or absent level; empty in CSV, `null` in JSON.
    Opt(Option<f64>),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) | Cell::Opt(Some(v)) => v.to_string(),
            Cell::Opt(None) => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) | Cell::Opt(Some(v)) => {
                serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number)
            }
            Cell::Opt(None) => Value::Null,
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, header: &'static [&'static str]) -> Self {
        Table {
            name,
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::config(format!("encoding {}: {e}", self.name));
        wtr.write_record(self.header).map_err(io)?;
        for row in &self.rows {
            wtr.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        wtr.into_inner()
            .map_err(|e| CliError::config(e.to_string()))
    }

    fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.to_string(), c.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut bytes =
            serde_json::to_vec_pretty(&rows).map_err(|e| CliError::config(e.to_string()))?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => write_atomic(dir, &format!("{}.csv", self.name), &self.to_csv()?),
            Format::Json => write_atomic(dir, &format!("{}.json", self.name), &self.to_json()?),
        }
    }
}

/// Writes `bytes` to `dir/name` via a temporary file and rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let fail =
        |e: std::io::Error| CliError::config(format!("writing {}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(fail)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.flush().map_err(fail)?;
    let file = tmp.persist(dir.join(name)).map_err(|e| fail(e.error))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        file.set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(fail)?;
    }
    drop(file);
    Ok(())
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::config(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(dir, name, &bytes)
}
