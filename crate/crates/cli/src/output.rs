//! Versioned CSV, JSON and plain-text renderings of command results.

use std::io::Write;
use std::path::Path;

use nvcoh::fitting::FitResult;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// Nine significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

/// Rounds to nine significant digits so JSON matches the CSV text.
fn json_num(v: f64) -> Value {
    if v.is_finite() {
        json!(num(v).parse::<f64>().unwrap_or(v))
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Int(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json_num(*v),
            Cell::Int(v) => json!(v),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(kind: &'static str, columns: &[&'static str]) -> Self {
        Table { kind, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                let v = json!({ "schema": SCHEMA, "kind": self.kind, "columns": self.columns, "rows": rows });
                Ok(pretty(&v))
            }
            Format::Csv | Format::Text => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).map_err(csv_err)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::csv)).map_err(csv_err)?;
                }
                let body = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
                Ok(format!("# schema={SCHEMA}\n{}", String::from_utf8_lossy(&body)))
            }
        }
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Input(e.to_string())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// A handful of named values, printed as `name value` lines or a JSON object.
pub fn render_values(kind: &str, values: &[(&str, f64)], format: Format) -> String {
    match format {
        Format::Json => {
            let mut m = serde_json::Map::new();
            m.insert("schema".into(), json!(SCHEMA));
            m.insert("kind".into(), json!(kind));
            for (k, v) in values {
                m.insert((*k).into(), json_num(*v));
            }
            pretty(&Value::Object(m))
        }
        Format::Csv | Format::Text => {
            let mut s = format!("# schema={SCHEMA}\n");
            for (k, v) in values {
                s.push_str(&format!("{k} {}\n", num(*v)));
            }
            s
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamEntry {
    pub name: String,
    pub value: Value,
    pub sigma: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub schema: u32,
    pub fit_kind: String,
    pub parameters: Vec<ParamEntry>,
    pub rss: Value,
    pub reduced_chi2: Value,
    pub n_points: usize,
    pub converged: bool,
    pub ill_conditioned: bool,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FitReport {
    pub fn new(kind: &str, fit: &FitResult) -> Self {
        let parameters = fit
            .names
            .iter()
            .zip(fit.params.iter().zip(&fit.sigmas))
            .map(|(n, (&v, &s))| ParamEntry { name: n.clone(), value: json_num(v), sigma: json_num(s) })
            .collect();
        FitReport {
            schema: SCHEMA,
            fit_kind: kind.into(),
            parameters,
            rss: json_num(fit.rss),
            reduced_chi2: json_num(fit.reduced_chi2()),
            n_points: fit.n_points,
            converged: fit.converged,
            ill_conditioned: fit.ill_conditioned,
            iterations: fit.iterations,
            seed: None,
        }
    }

    /// Appends a derived quantity.
    pub fn derived(&mut self, name: &str, value: f64, sigma: f64) {
        self.parameters.push(ParamEntry { name: name.into(), value: json_num(value), sigma: json_num(sigma) });
    }

    pub fn render(&self) -> String {
        pretty(&serde_json::to_value(self).expect("report serializes"))
    }
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
