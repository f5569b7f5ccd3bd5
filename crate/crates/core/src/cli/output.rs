//! Self-describing CSV and JSON documents.

use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e16)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    /// An exact value too wide for a JSON number, or a rational "num/den".
    Exact(String),
    Float(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl Cell {
    pub fn big(v: &BigInt) -> Self {
        match i128::try_from(v) {
            Ok(x) => Cell::Int(x),
            Err(_) => Cell::Exact(v.to_string()),
        }
    }

    pub fn ubig(v: &BigUint) -> Self {
        Cell::big(&BigInt::from(v.clone()))
    }

    pub fn rational(v: &BigRational) -> Self {
        if v.is_integer() {
            Cell::big(v.numer())
        } else {
            Cell::Exact(format!("{}/{}", v.numer(), v.denom()))
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Exact(s) | Cell::Text(s) => s.clone(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => match i64::try_from(*v) {
                Ok(x) => json!(x),
                Err(_) => json!(v.to_string()),
            },
            Cell::Exact(s) | Cell::Text(s) => json!(s),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::Bool(b) => json!(b),
            Cell::Null => Value::Null,
        }
    }
}

impl From<i128> for Cell {
    fn from(v: i128) -> Self {
        Cell::Int(v)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i128)
            }
        }
    )*};
}
int_cell!(u32, u64, usize, i64);

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map(Into::into).unwrap_or(Cell::Null)
    }
}

/// Output of one command: resolved configuration, a table, and summary lines.
#[derive(Debug, Clone)]
pub struct Document {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, String)>,
}

impl Document {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Document {
            command: command.to_string(),
            config: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    pub fn summary(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Value of column `name` in row `i`.
    pub fn cell(&self, i: usize, name: &str) -> Option<&Cell> {
        let j = self.columns.iter().position(|c| c == name)?;
        self.rows.get(i).map(|r| &r[j])
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        match format {
            Format::Csv => {
                writeln!(out, "# format_version={FORMAT_VERSION}").map_err(io)?;
                writeln!(out, "# command={}", self.command).map_err(io)?;
                for (k, v) in &self.config {
                    writeln!(out, "# {k}={v}").map_err(io)?;
                }
                for (k, v) in &self.summary {
                    writeln!(out, "# summary.{k}={v}").map_err(io)?;
                }
                let mut w = csv::Writer::from_writer(&mut *out);
                let csv_err = |e: csv::Error| Error::Io(e.to_string());
                w.write_record(&self.columns).map_err(csv_err)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(csv_err)?;
                }
                w.flush().map_err(io)?;
            }
            Format::Json => {
                let obj = |pairs: &[(String, String)]| {
                    Value::Object(pairs.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>())
                };
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect(),
                        )
                    })
                    .collect();
                let doc = json!({
                    "format_version": FORMAT_VERSION,
                    "command": self.command,
                    "config": obj(&self.config),
                    "summary": obj(&self.summary),
                    "rows": rows,
                });
                serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| Error::Io(e.to_string()))?;
                writeln!(out).map_err(io)?;
            }
        }
        Ok(())
    }

    pub fn to_string(&self, format: Format) -> String {
        let mut buf = Vec::new();
        self.write(format, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_exact_strings() {
        let r = BigRational::new(BigInt::from(6), BigInt::from(4));
        assert_eq!(Cell::rational(&r), Cell::Exact("3/2".into()));
        let big = BigInt::from(10).pow(40);
        assert_eq!(Cell::big(&big), Cell::Exact(big.to_string()));
        assert_eq!(Cell::big(&BigInt::from(-3)), Cell::Int(-3));
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut d = Document::new("demo", &["a", "b"]);
        d.config("k", 2);
        d.push(vec![Cell::Int(1), Cell::Text("x,y".into())]);
        let csv = d.to_string(Format::Csv);
        assert!(csv.starts_with("# format_version=1\n# command=demo\n# k=2\na,b\n1,\"x,y\"\n"));
        let v: Value = serde_json::from_str(&d.to_string(Format::Json)).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["rows"][0]["b"], "x,y");
        assert_eq!(v["config"]["k"], "2");
    }
}
