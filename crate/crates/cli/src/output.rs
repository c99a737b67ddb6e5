use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::{CliError, Format, Settings};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits, so every `f64` round-trips.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => csv_field(s),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
        }
    }
}

pub struct Table {
    pub command: &'static str,
    /// Extra `key: value` lines for the comment header.
    pub notes: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self {
            command,
            notes: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, settings: &Settings) -> Result<String, CliError> {
        let config = serde_json::to_string(settings)
            .map_err(|e| CliError::Failure(format!("cannot serialize config: {e}")))?;
        let policy = settings.loss_policy().as_str();
        match settings.format() {
            Format::Csv => {
                let mut out = String::new();
                out.push_str(&format!("# lambda-zeno {}\n", self.command));
                out.push_str(&format!("# config: {config}\n"));
                out.push_str(&format!("# loss_policy: {policy}\n"));
                for (k, v) in &self.notes {
                    out.push_str(&format!("# {k}: {v}\n"));
                }
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                Ok(out)
            }
            Format::Json => {
                let notes: Map<String, Value> = self
                    .notes
                    .iter()
                    .map(|(k, v)| (k.clone(), json!(v)))
                    .collect();
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                    .collect();
                let doc = json!({
                    "command": self.command,
                    "config": serde_json::to_value(settings).expect("settings serialize"),
                    "loss_policy": policy,
                    "notes": notes,
                    "columns": self.columns,
                    "rows": rows,
                });
                let mut text = serde_json::to_string_pretty(&doc)
                    .map_err(|e| CliError::Failure(format!("cannot serialize output: {e}")))?;
                text.push('\n');
                Ok(text)
            }
        }
    }
}

/// Writes to the file, or to standard output when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Failure(format!("cannot write output: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        assert_eq!(format_float(f64::NAN), "nan");
    }

    #[test]
    fn csv_quotes_text() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn header_records_config() {
        let mut t = Table::new("protocol", &["n_v", "r_vh"]);
        t.push(vec![0usize.into(), 0.25.into()]);
        let s = Settings {
            n_at: Some(2),
            ..Default::default()
        };
        let text = t.render(&s).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# lambda-zeno protocol");
        assert_eq!(lines[1], "# config: {\"n_at\":2}");
        assert_eq!(lines[2], "# loss_policy: discard");
        assert_eq!(lines[3], "n_v,r_vh");
        assert_eq!(lines[4], "0,2.5000000000000000e-1");
    }
}
