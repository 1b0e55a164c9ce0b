//! Rendering of results as CSV (with `#` metadata lines) or JSON.
use serde_json::{Map, Value};

use crate::config::Format;

/// One CSV/JSON cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // `+ 0.0` folds a negative zero into zero.
            Cell::Num(x) => format!("{:e}", x + 0.0),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    /// Non-finite numbers become strings so that JSON stays valid.
    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(x + 0.0),
            Cell::Num(x) => Value::from(format!("{x}")),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::from(*b),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

/// A command result. `summary` holds scalar fields of structured reports; it is
/// written as metadata in CSV and merged into the JSON result object.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub meta: Map<String, Value>,
    pub summary: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// JSON key holding the rows.
    pub rows_key: &'static str,
}

impl Report {
    pub fn new(
        meta: Map<String, Value>,
        columns: Vec<&'static str>,
        rows_key: &'static str,
    ) -> Self {
        Self {
            meta,
            summary: Map::new(),
            columns,
            rows: Vec::new(),
            rows_key,
        }
    }

    pub fn summary(&mut self, key: &str, v: Value) {
        self.summary.insert(key.into(), v);
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.json()).expect("values serialize");
                out.push(b'\n');
                out
            }
        }
    }

    fn csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (k, v) in self.meta.iter().chain(self.summary.iter()) {
            out.extend_from_slice(format!("# {k}: {v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn json(&self) -> Value {
        let mut result = self.summary.clone();
        if !self.columns.is_empty() {
            let rows: Vec<Value> = self
                .rows
                .iter()
                .map(|r| {
                    Value::Object(
                        self.columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| ((*c).to_string(), v.json()))
                            .collect(),
                    )
                })
                .collect();
            result.insert(self.rows_key.into(), Value::Array(rows));
        }
        let mut doc = Map::new();
        doc.insert("meta".into(), Value::Object(self.meta.clone()));
        doc.insert("result".into(), Value::Object(result));
        Value::Object(doc)
    }
}

/// JSON number for finite `x`, its text otherwise.
pub fn num(x: f64) -> Value {
    Cell::Num(x).json()
}
