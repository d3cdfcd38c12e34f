//! CSV and JSON encoders. Floats use the shortest decimal that parses back to
//! the same double, identically in both formats.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::args::Format;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    fn write_csv(self, out: &mut impl Write, buf: &mut ryu::Buffer) -> io::Result<()> {
        match self {
            Cell::Int(v) => write!(out, "{v}"),
            Cell::Float(v) => out.write_all(buf.format(v).as_bytes()),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Cell::Int(v) => Value::from(v),
            Cell::Float(v) => Value::from(v),
        }
    }
}

/// Rows of one data file plus the metadata that goes into its header.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    /// Extra `(key, value)` pairs: `# key: value` lines in CSV, fields of
    /// `data` in JSON.
    pub meta: Vec<(&'static str, Value)>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table { columns, rows: Vec::new(), meta: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn data_json(&self) -> Value {
        let mut data = Map::new();
        data.insert("columns".into(), json!(self.columns));
        for (k, v) in &self.meta {
            data.insert((*k).into(), v.clone());
        }
        let rows = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|c| c.to_json()).collect()))
            .collect();
        data.insert("rows".into(), Value::Array(rows));
        Value::Object(data)
    }
}

pub fn write_csv(out: &mut impl Write, config: &Value, table: &Table) -> io::Result<()> {
    writeln!(out, "# config: {config}")?;
    for (k, v) in &table.meta {
        writeln!(out, "# {k}: {}", csv_meta(v))?;
    }
    writeln!(out, "# {}", table.columns.join(","))?;
    let mut buf = ryu::Buffer::new();
    for row in &table.rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.write_all(b",")?;
            }
            cell.write_csv(out, &mut buf)?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn csv_meta(v: &Value) -> String {
    match v {
        Value::Array(items) => items.iter().map(csv_meta).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

pub fn write_json(
    out: &mut impl Write,
    config: &Value,
    table: &Table,
    report: Option<&Value>,
) -> io::Result<()> {
    let mut doc = Map::new();
    doc.insert("config".into(), config.clone());
    doc.insert("data".into(), table.data_json());
    if let Some(r) = report {
        doc.insert("report".into(), r.clone());
    }
    serde_json::to_writer(&mut *out, &Value::Object(doc))?;
    out.write_all(b"\n")
}

pub fn emit(
    path: Option<&Path>,
    format: Format,
    config: &Value,
    table: &Table,
    report: Option<&Value>,
) -> io::Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    match format {
        Format::Csv => write_csv(&mut out, config, table)?,
        Format::Json => write_json(&mut out, config, table, report)?,
    }
    out.flush()
}

/// Parses a CSV file written by [`write_csv`] back into numbers.
pub fn read_csv_rows(text: &str) -> Result<Vec<Vec<f64>>, String> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().map_err(|e| format!("bad field '{f}': {e}")))
                .collect()
        })
        .collect()
}
