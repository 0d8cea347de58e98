//! Plain-text table output.
//!
//! CSV files start with comment lines echoing the producing version and the
//! run configuration as one-line JSON. Floats are written with 17 significant
//! digits so that values round-trip exactly.

use std::fmt::Write as _;

use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits in scientific notation; `NaN`, `inf`, `-inf` verbatim.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Renders the table preceded by `# qforge <version>` and `# config <json>`.
    pub fn render<C: Serialize>(&self, config: &C) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qforge {VERSION}");
        let _ = writeln!(out, "# config {}", config_line(config));
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Single-line JSON of `config`, or `{}` if it cannot be serialised.
pub fn config_line<C: Serialize>(config: &C) -> String {
    serde_json::to_string(config).unwrap_or_else(|_| "{}".to_string())
}
