//! Versioned CSV output. Every file starts with `#schema=v1`, then a header.

use std::fmt::Display;
use std::fs;
use std::io;
use std::path::Path;

pub const SCHEMA_LINE: &str = "#schema=v1";

pub struct CsvTable {
    text: String,
    width: usize,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        let mut text = String::from(SCHEMA_LINE);
        text.push('\n');
        text.push_str(&columns.join(","));
        text.push('\n');
        CsvTable {
            text,
            width: columns.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.width, "row width does not match header");
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        fs::write(path, &self.text)
    }
}

/// Display form for a CSV cell.
pub fn cell<T: Display>(v: T) -> String {
    v.to_string()
}

/// Empty cell for `None`.
pub fn opt<T: Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Parse a schema-v1 CSV into (header, rows).
pub fn parse(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), String> {
    let mut lines = text.lines();
    if lines.next() != Some(SCHEMA_LINE) {
        return Err(format!("expected `{SCHEMA_LINE}` on the first line"));
    }
    let header: Vec<String> = lines
        .next()
        .ok_or("missing header")?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
        return Err(format!("row {} has the wrong number of fields", bad + 1));
    }
    Ok((header, rows))
}
