//! Result rows and their CSV/JSON encodings.

use std::io::Write;

use peano_core::exitlab::{ExitRecord, ExitSide};
use peano_core::stats::EstimateWithCI;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Format, ResolvedConfig};

/// CSV header, in emission order.
pub const CSV_COLUMNS: [&str; 18] = [
    "experiment",
    "alpha",
    "beta_plus",
    "beta_minus",
    "B_plus",
    "B_minus",
    "c",
    "epsilon",
    "n_paths",
    "horizon",
    "quantity",
    "point",
    "stderr",
    "ci_lo",
    "ci_hi",
    "runtime_ms",
    "master_seed",
    "flags",
];

/// One reported quantity at one ε. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub alpha: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    #[serde(rename = "B_plus")]
    pub b_plus: f64,
    #[serde(rename = "B_minus")]
    pub b_minus: f64,
    pub c: f64,
    pub epsilon: f64,
    pub n_paths: u64,
    pub horizon: f64,
    pub quantity: String,
    pub point: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub runtime_ms: Option<u64>,
    pub master_seed: u64,
    /// `;`-separated flags and materialized defaults.
    pub flags: String,
}

impl ResultRow {
    pub fn new(cfg: &ResolvedConfig, epsilon: f64, quantity: &str, est: EstimateWithCI) -> Self {
        let p = &cfg.params;
        Self {
            experiment: cfg.experiment.as_str().into(),
            alpha: p.alpha,
            beta_plus: p.beta_plus,
            beta_minus: p.beta_minus,
            b_plus: p.b_plus,
            b_minus: p.b_minus,
            c: p.c,
            epsilon,
            n_paths: cfg.n_paths,
            horizon: cfg.horizon,
            quantity: quantity.into(),
            point: est.point,
            stderr: est.stderr,
            ci_lo: est.ci_lo,
            ci_hi: est.ci_hi,
            runtime_ms: None,
            master_seed: cfg.master_seed,
            flags: String::new(),
        }
    }
}

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub experiment: String,
    /// The configuration with every default filled in.
    pub config: ResolvedConfig,
    pub rows: Vec<ResultRow>,
    /// Per-ε structured detail (bundles, audits, oracle reports, defaults).
    pub details: Vec<Value>,
    #[serde(skip)]
    pub records: Vec<(f64, ExitRecord)>,
    /// Oracles that missed their thresholds (validate-noise only).
    pub failed_oracles: Vec<String>,
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(run: &RunOutput, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, run)?;
    writeln!(out)
}

pub fn write_output<W: Write>(run: &RunOutput, format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(&run.rows, out).map_err(std::io::Error::other),
        Format::Json => write_json(run, out),
    }
}

#[derive(Serialize)]
struct RecordRow {
    epsilon: f64,
    exit_time: f64,
    exit_side: ExitSide,
    exit_value: f64,
    path_seed: u64,
}

/// One row per simulated path: `epsilon, exit_time, exit_side, exit_value, path_seed`.
pub fn write_records<W: Write>(records: &[(f64, ExitRecord)], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (epsilon, record) in records {
        w.serialize(RecordRow {
            epsilon: *epsilon,
            exit_time: record.exit_time,
            exit_side: record.exit_side,
            exit_value: record.exit_value,
            path_seed: record.path_seed,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width table for the terminal.
pub fn summary_table(rows: &[ResultRow]) -> String {
    let mut s = format!(
        "{:<16} {:>10} {:<28} {:>13} {:>11}  {}\n",
        "experiment", "epsilon", "quantity", "point", "stderr", "flags"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<16} {:>10.3e} {:<28} {:>13.6} {:>11.3e}  {}\n",
            r.experiment, r.epsilon, r.quantity, r.point, r.stderr, r.flags
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            experiment: "select-prob".into(),
            alpha: 1.5,
            beta_plus: 0.5,
            beta_minus: 0.5,
            b_plus: 1.0,
            b_minus: 2.0,
            c: 1.0,
            epsilon: 1e-3,
            n_paths: 10,
            horizon: 1.0,
            quantity: "p_plus".into(),
            point: 0.5,
            stderr: 0.1,
            ci_lo: 0.3,
            ci_hi: 0.7,
            runtime_ms: None,
            master_seed: 7,
            flags: "step=0.001".into(),
        }
    }

    #[test]
    fn csv_header_matches_column_list() {
        let mut buf = Vec::new();
        write_csv(&[row()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, CSV_COLUMNS.join(","));
        // Unset runtime is an empty field.
        assert!(text.lines().nth(1).unwrap().contains(",,7,"));
    }

    #[test]
    fn empty_csv_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn record_csv_columns() {
        let rec = ExitRecord {
            exit_time: 0.5,
            exit_side: ExitSide::Above,
            exit_value: 0.2,
            path_seed: 3,
        };
        let mut buf = Vec::new();
        write_records(&[(0.01, rec)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "epsilon,exit_time,exit_side,exit_value,path_seed");
        assert_eq!(lines.next().unwrap(), "0.01,0.5,above,0.2,3");
    }
}
