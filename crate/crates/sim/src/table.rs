//! Plot-ready numeric tables in CSV or JSON.
//!
//! Numbers are written with 12 significant digits. CSV writes NaN as `NaN`;
//! JSON writes it as `null`. Run metadata goes into the JSON object, or into a
//! `<file>.meta.json` sidecar next to a CSV file.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Map, Value};
use thiserror::Error;

/// Significant digits kept on output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },

    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },

    #[error("{path}: {message}")]
    Malformed { path: String, message: String },

    #[error("row {row} has {found} values, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Map<String, Value>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn check(&self) -> Result<(), TableError> {
        let expected = self.columns.len();
        match self.rows.iter().position(|r| r.len() != expected) {
            Some(row) => Err(TableError::Ragged {
                row,
                found: self.rows[row].len(),
                expected,
            }),
            None => Ok(()),
        }
    }
}

/// `v` in scientific notation with [`SIGNIFICANT_DIGITS`] digits.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
    }
}

/// `v` rounded to [`SIGNIFICANT_DIGITS`] digits.
pub fn round_significant(v: f64) -> f64 {
    if v.is_finite() {
        format_number(v).parse().unwrap_or(v)
    } else {
        v
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&v| format_number(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json(table: &Table) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            Value::Array(
                row.iter()
                    .map(|&v| {
                        serde_json::Number::from_f64(round_significant(v))
                            .map_or(Value::Null, Value::Number)
                    })
                    .collect(),
            )
        })
        .collect();
    let mut obj = Map::new();
    obj.insert(
        "columns".into(),
        Value::Array(table.columns.iter().cloned().map(Value::String).collect()),
    );
    obj.insert("rows".into(), Value::Array(rows));
    obj.insert("metadata".into(), Value::Object(table.metadata.clone()));
    Value::Object(obj)
}

pub fn write_json<W: Write>(table: &Table, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json(table))?;
    writeln!(out)
}

/// Sidecar path used for CSV metadata and sweep error logs.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes `table` to `path`, or to stdout when `path` is `None`. A CSV file
/// gets a `.meta.json` sidecar when the table carries metadata.
pub fn write_table(table: &Table, path: Option<&Path>, format: Format) -> Result<(), TableError> {
    table.check()?;
    let shown = path.map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string());
    let io_err = |source| TableError::Io {
        path: shown.clone(),
        source,
    };
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err)?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => write_csv(table, sink).map_err(|source| TableError::Csv {
            path: shown.clone(),
            source,
        })?,
        Format::Json => write_json(table, sink).map_err(io_err)?,
    }
    if let (Format::Csv, Some(p)) = (format, path) {
        if !table.metadata.is_empty() {
            let meta = sidecar(p, ".meta.json");
            let file = File::create(&meta).map_err(|source| TableError::Io {
                path: meta.display().to_string(),
                source,
            })?;
            serde_json::to_writer_pretty(BufWriter::new(file), &table.metadata).map_err(
                |source| TableError::Json {
                    path: meta.display().to_string(),
                    source,
                },
            )?;
        }
    }
    Ok(())
}

fn parse_cell(s: &str) -> Option<f64> {
    match s.trim() {
        "NaN" | "nan" => Some(f64::NAN),
        other => other.parse().ok(),
    }
}

/// Reads a table written by [`write_table`]. CSV metadata is not reloaded.
pub fn read_table(path: &Path, format: Format) -> Result<Table, TableError> {
    let shown = path.display().to_string();
    let malformed = |message: String| TableError::Malformed {
        path: shown.clone(),
        message,
    };
    match format {
        Format::Csv => {
            let mut r = csv::Reader::from_path(path).map_err(|source| TableError::Csv {
                path: shown.clone(),
                source,
            })?;
            let columns: Vec<String> = r
                .headers()
                .map_err(|source| TableError::Csv {
                    path: shown.clone(),
                    source,
                })?
                .iter()
                .map(str::to_string)
                .collect();
            let mut table = Table::new::<String>(columns);
            for (i, rec) in r.records().enumerate() {
                let rec = rec.map_err(|source| TableError::Csv {
                    path: shown.clone(),
                    source,
                })?;
                let row = rec
                    .iter()
                    .map(|s| parse_cell(s).ok_or_else(|| malformed(format!("row {i}: `{s}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                table.push(row);
            }
            Ok(table)
        }
        Format::Json => {
            let mut text = String::new();
            File::open(path)
                .and_then(|mut f| f.read_to_string(&mut text))
                .map_err(|source| TableError::Io {
                    path: shown.clone(),
                    source,
                })?;
            let value: Value = serde_json::from_str(&text).map_err(|source| TableError::Json {
                path: shown.clone(),
                source,
            })?;
            let columns = value["columns"]
                .as_array()
                .ok_or_else(|| malformed("missing `columns`".into()))?
                .iter()
                .map(|c| c.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| malformed("non-string column name".into()))?;
            let mut table = Table::new::<String>(columns);
            for row in value["rows"]
                .as_array()
                .ok_or_else(|| malformed("missing `rows`".into()))?
            {
                let row = row
                    .as_array()
                    .ok_or_else(|| malformed("row is not an array".into()))?
                    .iter()
                    .map(|v| {
                        if v.is_null() {
                            Some(f64::NAN)
                        } else {
                            v.as_f64()
                        }
                    })
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| malformed("non-numeric cell".into()))?;
                table.push(row);
            }
            if let Some(meta) = value["metadata"].as_object() {
                table.metadata = meta.clone();
            }
            Ok(table)
        }
    }
}
