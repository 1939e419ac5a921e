use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const AVERAGE_LABEL: &str = "Average";

/// Error per (row label, horizon) with a derived average row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    /// Column headers, e.g. horizon milliseconds.
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl ErrorTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn for_horizons(horizons_ms: &[u32]) -> Self {
        Self::new(horizons_ms.iter().map(|h| h.to_string()).collect())
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::shape(format!(
                "row of {} values for {} columns",
                values.len(),
                self.columns.len()
            )));
        }
        self.rows.push((label.into(), values));
        Ok(())
    }

    pub fn row(&self, label: &str) -> Option<&[f64]> {
        self.rows.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }

    /// Arithmetic mean of the rows, column by column; `None` for an empty table.
    pub fn average(&self) -> Option<Vec<f64>> {
        if self.rows.is_empty() {
            return None;
        }
        let n = self.rows.len() as f64;
        Some(
            (0..self.columns.len())
                .map(|c| self.rows.iter().map(|(_, v)| v[c]).sum::<f64>() / n)
                .collect(),
        )
    }

    /// One line per row in insertion order, then the average row.
    pub fn to_csv(&self, first_header: &str) -> String {
        let mut out = String::new();
        out.push_str(first_header);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        let avg = self.average().map(|v| (AVERAGE_LABEL.to_string(), v));
        for (label, values) in self.rows.iter().chain(avg.as_ref()) {
            out.push_str(label);
            for v in values {
                let _ = write!(out, ",{v:.6}");
            }
            out.push('\n');
        }
        out
    }
}
