use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::CliError;

/// Reads a single numeric column. A non-numeric first line is treated as a
/// header; blank lines and `#` comments are skipped; LF and CRLF both work.
pub fn read_series(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_series(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_series(text: &str) -> Result<Vec<f64>, String> {
    let mut values = Vec::new();
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.contains(',') {
            return Err(format!("line {}: expected a single column", i + 1));
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                values.push(v);
                seen_data = true;
            }
            Ok(_) => return Err(format!("line {}: non-finite value '{line}'", i + 1)),
            Err(_) if !seen_data && values.is_empty() && i == first_content_line(text) => {}
            Err(_) => return Err(format!("line {}: not a number: '{line}'", i + 1)),
        }
    }
    if values.is_empty() {
        return Err("no data".into());
    }
    Ok(values)
}

fn first_content_line(text: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .unwrap_or(0)
}

/// A column-oriented table written as CSV (with a leading `# flags` comment)
/// or as JSON with one array per column.
pub struct Table {
    pub flags: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // `{}` on f64 is the shortest representation that round-trips.
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = format!("# {}\n{}\n", self.flags, self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut obj = Map::new();
        obj.insert("flags".into(), json!(self.flags));
        for (i, name) in self.columns.iter().enumerate() {
            obj.insert(
                (*name).into(),
                Value::Array(self.rows.iter().map(|r| r[i].json()).collect()),
            );
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON values are finite");
        s.push('\n');
        s
    }

    /// Writes to `out` (JSON if it ends in `.json`) or to stdout as CSV.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        match out {
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(self.to_csv().as_bytes())
                    .map_err(|e| CliError::Input(format!("cannot write output: {e}")))
            }
            Some(path) => {
                let body = if path.extension().is_some_and(|e| e == "json") {
                    self.to_json()
                } else {
                    self.to_csv()
                };
                fs::write(path, body).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_crlf() {
        assert_eq!(parse_series("value\r\n1.5\r\n\r\n-2\r\n").unwrap(), vec![1.5, -2.0]);
        assert_eq!(parse_series("# note\n3\n4\n").unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn malformed_input() {
        assert!(parse_series("").is_err());
        assert!(parse_series("1\nx\n").is_err());
        assert!(parse_series("1,2\n").is_err());
        assert!(parse_series("a\nb\n").is_err());
        assert!(parse_series("1\nNaN\n").is_err());
    }

    #[test]
    fn shortest_round_trip_format() {
        let v = 0.1 + 0.2;
        assert_eq!(Cell::Num(v).csv().parse::<f64>().unwrap(), v);
        assert_eq!(Cell::Num(1.0).csv(), "1");
    }
}
