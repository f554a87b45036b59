//! Tabular output as CSV (17 significant digits) or a JSON array of records.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Null => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
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

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table { headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn record(&self, i: usize) -> Value {
        let mut m = Map::new();
        for (h, c) in self.headers.iter().zip(&self.rows[i]) {
            m.insert(h.to_string(), c.json());
        }
        Value::Object(m)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.headers)?;
        for row in &self.rows {
            wr.write_record(row.iter().map(Cell::csv))?;
        }
        wr.flush()
    }

    /// A single record is written as a JSON object, anything else as an
    /// array.
    pub fn write_json<W: Write>(&self, mut w: W, single: bool) -> io::Result<()> {
        let v = if single && self.rows.len() == 1 {
            self.record(0)
        } else {
            Value::Array((0..self.rows.len()).map(|i| self.record(i)).collect())
        };
        serde_json::to_writer_pretty(&mut w, &v)?;
        writeln!(w)
    }

    pub fn write<W: Write>(&self, w: W, format: Format, single: bool) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w, single),
        }
    }
}

/// Writes to `path`, or to stdout when it is `None`.
pub fn emit(table: &Table, path: Option<&Path>, format: Format, single: bool) -> io::Result<()> {
    match path {
        Some(p) => {
            let f = io::BufWriter::new(File::create(p)?);
            table.write(f, format, single)
        }
        None => table.write(io::stdout().lock(), format, single),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_doubles() {
        let mut t = Table::new(&["a", "b"]);
        let x = 0.1 + 0.2;
        t.push(vec![x.into(), "s".into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let field = text.lines().nth(1).unwrap().split(',').next().unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), x);
        assert_eq!(text.lines().next().unwrap(), "a,b");
    }

    #[test]
    fn json_single_record_and_nulls() {
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![Cell::Null, f64::NAN.into()]);
        let mut buf = Vec::new();
        t.write_json(&mut buf, true).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["x"], Value::Null);
        assert_eq!(v["y"], Value::Null);
    }

    #[test]
    fn header_only_table() {
        let t = Table::new(&["theta", "phi"]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "theta,phi\n");
    }
}
