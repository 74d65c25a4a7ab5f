//! Convergence tables and their CSV/JSON output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "level,ndof,h1_error,rate,iters,orth_L2,orth_l2,wall_ms";

/// Output format version written into JSON files.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub level: usize,
    pub ndof: usize,
    /// Absent when the problem has no closed-form solution.
    pub h1_error: Option<f64>,
    pub rate: Option<f64>,
    pub iters: usize,
    /// `max_k |(u_h, z_k)|`
    #[serde(rename = "orth_L2")]
    pub orth_l2_norm: f64,
    /// `max_k |Zᵀ u_h|`
    #[serde(rename = "orth_l2")]
    pub orth_ell2: f64,
    pub wall_ms: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<Row>,
}

impl ConvergenceTable {
    /// Appends a row, filling in its rate from the previous one.
    pub fn push(&mut self, mut row: Row) {
        row.rate = match (self.rows.last().and_then(|p| p.h1_error), row.h1_error) {
            (Some(prev), Some(e)) => Some(rate(prev, e)),
            _ => None,
        };
        self.rows.push(row);
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            let rate = r.rate.map_or(String::new(), |v| format!("{v:.4}"));
            let err = r.h1_error.map_or(String::new(), |v| format!("{v:.6e}"));
            writeln!(
                w,
                "{},{},{},{},{},{:.6e},{:.6e},{:.1}",
                r.level, r.ndof, err, rate, r.iters, r.orth_l2_norm, r.orth_ell2, r.wall_ms
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("ascii")
    }
}

/// `log2(e_prev / e)`: the rate for a halved mesh size.
pub fn rate(prev: f64, current: f64) -> f64 {
    (prev / current).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JsonReport<C> {
    pub version: String,
    pub config: C,
    pub table: ConvergenceTable,
}

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

/// Writes the table to `path` (stdout when `None`).
pub fn emit<C: Serialize>(
    table: &ConvergenceTable,
    config: &C,
    format: Format,
    path: Option<&Path>,
) -> Result<(), EmitError> {
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let report = JsonReport {
                version: ARTIFACT_VERSION.to_string(),
                config,
                table: table.clone(),
            };
            serde_json::to_string_pretty(&report)? + "\n"
        }
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| EmitError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
