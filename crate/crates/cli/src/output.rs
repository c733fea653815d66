//! CSV tables and JSON summaries.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Signed(i64),
    Text(String),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Signed(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => "none".to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<i32> for Cell {
    fn from(n: i32) -> Self {
        Cell::Signed(n.into())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), CliError> {
        assert_eq!(row.len(), self.columns.len(), "row width");
        for cell in &row {
            if let Cell::Num(x) = cell {
                if !x.is_finite() {
                    return Err(CliError::Numerical(format!("non-finite value {x} in output row")));
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// CSV text: a comment line with the config hash, then the column header.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut out = String::new();
        writeln!(out, "# config_sha256={config_hash}").unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

/// A finite number as JSON; NaN and infinities are numerical failures.
pub fn num(x: f64) -> Result<Value, CliError> {
    if !x.is_finite() {
        return Err(CliError::Numerical(format!("non-finite value {x} in summary")));
    }
    Ok(Value::from(x))
}

pub struct Report {
    pub command: &'static str,
    pub summary: serde_json::Map<String, Value>,
    pub table: Option<Table>,
}

impl Report {
    pub fn summary_json(&self, config_hash: &str) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("command".into(), Value::from(self.command));
        map.insert("config_sha256".into(), Value::from(config_hash));
        for (k, v) in &self.summary {
            map.insert(k.clone(), v.clone());
        }
        Value::Object(map)
    }

    pub fn write(&self, dir: &Path, config_hash: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        if let Some(table) = &self.table {
            std::fs::write(dir.join(format!("{}.csv", self.command)), table.to_csv(config_hash))?;
        }
        let summary = serde_json::to_string_pretty(&self.summary_json(config_hash)).expect("summary serializes");
        std::fs::write(dir.join(format!("{}.json", self.command)), summary + "\n")?;
        Ok(())
    }

    /// Plain-text rendering for the terminal.
    pub fn render_text(&self, config_hash: &str) -> String {
        let mut out = String::new();
        for (k, v) in &self.summary {
            writeln!(out, "{k}: {v}").unwrap();
        }
        if let Some(table) = &self.table {
            out.push_str(&table.to_csv(config_hash));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_hash_and_header() {
        let mut t = Table::new(vec!["x", "z"]);
        t.push(vec![Cell::from(0.5), Cell::from(None::<f64>)]).unwrap();
        let csv = t.to_csv("abc");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines, ["# config_sha256=abc", "x,z", "5e-1,none"]);
    }

    #[test]
    fn rejects_non_finite() {
        let mut t = Table::new(vec!["x"]);
        assert!(t.push(vec![Cell::from(f64::NAN)]).is_err());
        assert!(num(f64::INFINITY).is_err());
    }
}
