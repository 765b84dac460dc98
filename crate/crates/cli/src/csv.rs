//! The CSV dialect written by every subcommand: a header, data rows, then
//! optional `# ` comment lines. Cells never contain commas or quotes.

use std::fmt;

/// Seventeen significant digits; enough to reproduce any `f64` exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_float(cell: &str) -> Option<f64> {
    cell.parse().ok()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for CsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for CsvError {}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Comment lines after the rows, without the leading `# `.
    pub footer: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            ..Table::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn comment(&mut self, text: impl Into<String>) {
        self.footer.push(text.into());
    }

    /// Column index by header name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// `key=value` from a footer line such as `converged_at=4`.
    pub fn footer_value(&self, key: &str) -> Option<&str> {
        self.footer
            .iter()
            .find_map(|c| c.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
    }

    pub fn emit(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        for c in &self.footer {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CsvError> {
        let mut lines = text.split_terminator('\n').enumerate();
        let header: Vec<String> = match lines.next() {
            Some((_, h)) if !h.is_empty() && !h.starts_with('#') => h.split(',').map(str::to_string).collect(),
            _ => {
                return Err(CsvError {
                    line: 1,
                    message: "missing header".into(),
                })
            }
        };
        let mut table = Table::new(header);
        for (i, line) in lines {
            let n = i + 1;
            if let Some(c) = line.strip_prefix("# ") {
                table.footer.push(c.to_string());
            } else if !table.footer.is_empty() || line.starts_with('#') {
                return Err(CsvError {
                    line: n,
                    message: "data after the footer, or malformed comment".into(),
                });
            } else {
                let row: Vec<String> = line.split(',').map(str::to_string).collect();
                if row.len() != table.header.len() {
                    return Err(CsvError {
                        line: n,
                        message: format!("expected {} cells, found {}", table.header.len(), row.len()),
                    });
                }
                table.rows.push(row);
            }
        }
        if !text.ends_with('\n') {
            return Err(CsvError {
                line: text.lines().count(),
                message: "missing final newline".into(),
            });
        }
        Ok(table)
    }
}
