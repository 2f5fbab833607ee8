use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// `x` with 12 significant digits, like C's `%.12g`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_number(*v),
            Cell::Text(v) => v.clone(),
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            // round-trip through the printed form so JSON carries the same
            // 12 digits as CSV
            Cell::Num(v) => format_number(*v).parse::<f64>().map(Value::from).unwrap_or(Value::Null),
            Cell::Text(v) => json!(v),
            Cell::Bool(v) => json!(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Provenance written next to JSON records.
pub struct Meta<'a> {
    pub command: &'a str,
    pub args: &'a [String],
    pub mode: Option<&'a str>,
    pub extra: Vec<(&'static str, Cell)>,
}

fn render(table: &Table, meta: &Meta<'_>, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(&table.columns)?;
            for row in &table.rows {
                writer.write_record(row.iter().map(Cell::text))?;
            }
            writer.into_inner().map_err(|e| e.into_error())
        }
        Format::Json => {
            let mut meta_block = Map::new();
            meta_block.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
            meta_block.insert("command".into(), json!(meta.command));
            meta_block.insert("args".into(), json!(meta.args));
            if let Some(mode) = meta.mode {
                meta_block.insert("mode".into(), json!(mode));
            }
            for (key, value) in &meta.extra {
                meta_block.insert((*key).into(), value.json());
            }
            let records: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    Value::Object(table.columns.iter().zip(row).map(|(k, v)| (k.to_string(), v.json())).collect())
                })
                .collect();
            let mut bytes = serde_json::to_vec_pretty(&json!({ "meta": meta_block, "records": records }))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

pub fn emit(table: &Table, meta: &Meta<'_>, format: Format, path: Option<&Path>) -> io::Result<()> {
    let bytes = render(table, meta, format)?;
    match path {
        Some(p) => File::create(p)?.write_all(&bytes),
        None => io::stdout().lock().write_all(&bytes),
    }
}
