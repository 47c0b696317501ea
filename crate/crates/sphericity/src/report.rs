//! Report serialization: the CSV and JSON schemas consumed by external
//! plotting and downstream analysis.
//!
//! Both formats carry the same row schema:
//! `scenario, n, p, v, method, reps, rejection_rate, mean_sd_ratio,
//! variance_ratio, alpha, master_seed`. Rates and ratios are printed with
//! six decimal places in CSV; JSON carries them at full (round-trip exact)
//! precision. Undefined fields (John's statistic has no calibrated rate)
//! are empty in CSV and `null` in JSON. All formatting is locale
//! independent.

use serde::{Deserialize, Serialize};

use crate::montecarlo::{CellSummary, McReport};

/// Output format selector for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// One row of the emitted report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub v: f64,
    pub method: String,
    pub reps: usize,
    pub rejection_rate: Option<f64>,
    pub mean_sd_ratio: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub alpha: f64,
    pub master_seed: u64,
}

/// Top-level JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub rows: Vec<ReportRow>,
}

impl ReportRow {
    fn from_cell(cell: &CellSummary, alpha: f64, master_seed: u64) -> Self {
        ReportRow {
            scenario: cell.scenario.as_str().to_string(),
            n: cell.n,
            p: cell.p,
            v: cell.v,
            method: cell.method.as_str().to_string(),
            reps: cell.reps,
            rejection_rate: cell.rejection_rate,
            mean_sd_ratio: cell.mean_sd_ratio,
            variance_ratio: cell.variance_ratio,
            alpha,
            master_seed,
        }
    }
}

pub fn report_rows(report: &McReport) -> Vec<ReportRow> {
    report
        .cells
        .iter()
        .map(|c| ReportRow::from_cell(c, report.alpha, report.master_seed))
        .collect()
}

/// Serialize a report to the requested format as a byte stream.
pub fn emit_report(report: &McReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => emit_csv(report).into_bytes(),
        ReportFormat::Json => emit_json(report).into_bytes(),
    }
}

pub const CSV_HEADER: &str =
    "scenario,n,p,v,method,reps,rejection_rate,mean_sd_ratio,variance_ratio,alpha,master_seed";

pub fn emit_csv(report: &McReport) -> String {
    let mut out = String::with_capacity(64 * (report.cells.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in report_rows(report) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            row.scenario,
            row.n,
            row.p,
            row.v,
            row.method,
            row.reps,
            opt6(row.rejection_rate),
            opt6(row.mean_sd_ratio),
            opt6(row.variance_ratio),
            row.alpha,
            row.master_seed
        ));
    }
    out
}

pub fn emit_json(report: &McReport) -> String {
    let doc = JsonReport {
        rows: report_rows(report),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Diagnostics series for one scenario and sample size: one row per
/// (p, method) with the two calibration ratios.
pub fn emit_diagnose_csv(report: &McReport) -> String {
    let mut out = String::from("p,method,mean_sd_ratio,variance_ratio\n");
    for cell in &report.cells {
        out.push_str(&format!(
            "{},{},{},{}\n",
            cell.p,
            cell.method.as_str(),
            opt6(cell.mean_sd_ratio),
            opt6(cell.variance_ratio)
        ));
    }
    out
}

fn opt6(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{run_experiment, ExperimentConfig};
    use sphericity_core::dist::Scenario;
    use sphericity_core::testing::Method;

    fn small_report() -> McReport {
        let mut cfg = ExperimentConfig::single(Scenario::StandardNormal, 8, 6, 0.0, 99);
        cfg.reps = 12;
        cfg.methods = vec![Method::Spearman, Method::Kendall, Method::John];
        run_experiment(&cfg).unwrap()
    }

    #[test]
    fn empty_grid_is_header_only() {
        let report = McReport {
            alpha: 0.05,
            master_seed: 1,
            cells: vec![],
        };
        let csv = emit_csv(&report);
        assert_eq!(csv, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_method_cell_is_two_lines() {
        let mut cfg = ExperimentConfig::single(Scenario::StandardNormal, 8, 6, 0.0, 99);
        cfg.reps = 2;
        cfg.methods = vec![Method::Spearman];
        let report = run_experiment(&cfg).unwrap();
        let csv = emit_csv(&report);
        assert_eq!(csv.trim_end().lines().count(), 2);
        assert!(csv.starts_with(CSV_HEADER));
    }

    #[test]
    fn json_round_trips_exactly() {
        let report = small_report();
        let json = emit_json(&report);
        let parsed: JsonReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.rows, report_rows(&report));
        // re-serialization is byte-identical
        let mut again = serde_json::to_string_pretty(&parsed).unwrap();
        again.push('\n');
        assert_eq!(json, again);
    }

    #[test]
    fn john_fields_are_empty_in_csv_and_null_in_json() {
        let report = small_report();
        let csv = emit_csv(&report);
        let john_line = csv.lines().find(|l| l.contains("JOHN")).unwrap();
        let fields: Vec<&str> = john_line.split(',').collect();
        assert_eq!(fields[6], ""); // rejection_rate
        assert_ne!(fields[7], ""); // mean_sd_ratio is defined
        assert_eq!(fields[8], ""); // variance_ratio
        let json = emit_json(&report);
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        let john = doc["rows"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["method"] == "JOHN")
            .unwrap();
        assert!(john["rejection_rate"].is_null());
    }

    #[test]
    fn csv_prints_six_decimals() {
        let report = small_report();
        let csv = emit_csv(&report);
        let line = csv.lines().nth(1).unwrap();
        let rate = line.split(',').nth(6).unwrap();
        assert_eq!(rate.split('.').nth(1).unwrap().len(), 6);
    }
}
