//! Reading the documented CSV inputs. Lines starting with `#` are comments.

use std::path::Path;

use crate::error::CliError;

pub struct CsvData {
    path: String,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvData {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let display = path.display().to_string();
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::Input(format!("{display}: {e}")))?;
        let headers = r
            .headers()
            .map_err(|e| CliError::Input(format!("{display}: {e}")))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| CliError::Input(format!("{display}: {e}")))?;
            rows.push(rec.iter().map(str::to_owned).collect());
        }
        if rows.is_empty() {
            return Err(CliError::Input(format!("{display}: no data rows")));
        }
        Ok(CsvData { path: display, headers, rows })
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn has(&self, name: &str) -> bool {
        self.index(name).is_some()
    }

    /// Raw text of a required column.
    pub fn text(&self, name: &str) -> Result<Vec<&str>, CliError> {
        let k = self.index(name).ok_or_else(|| {
            CliError::Input(format!(
                "{}: missing column '{name}' (found: {})",
                self.path,
                self.headers.join(", ")
            ))
        })?;
        Ok(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    pub fn numbers(&self, name: &str) -> Result<Vec<f64>, CliError> {
        self.text(name)?
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.parse::<f64>().map_err(|_| {
                    CliError::Input(format!("{}: row {} column '{name}': cannot parse '{s}'", self.path, i + 1))
                })
            })
            .collect()
    }

    pub fn optional_numbers(&self, name: &str) -> Result<Option<Vec<f64>>, CliError> {
        if self.has(name) {
            self.numbers(name).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn column_error(&self, name: &str, row: usize, msg: &str) -> CliError {
        CliError::Input(format!("{}: row {} column '{name}': {msg}", self.path, row + 1))
    }
}
