use std::fmt::Write as _;
use std::path::Path;

use crate::campaign::ExperimentReport;
use crate::error::{BenchError, Result};

pub const CSV_HEADER: &str = "scenario,method,n_sources,snr_db,rho,trial,metric_name,value";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Long-format CSV, one line per (record, metric). Noiseless SNR and absent rho are empty fields.
pub fn report_to_csv(report: &ExperimentReport) -> String {
    let scenario = report.config.scenario.name();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.records {
        for (name, value) in r.metrics() {
            writeln!(
                out,
                "{scenario},{},{},{},{},{},{name},{value}",
                r.method,
                r.n_sources,
                opt(r.snr_db),
                opt(r.rho),
                r.trial
            )
            .expect("write to String");
        }
    }
    out
}

pub fn report_to_json(report: &ExperimentReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn report_from_json(text: &str) -> std::result::Result<ExperimentReport, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn write_report_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    std::fs::write(path, report_to_csv(report)).map_err(|e| BenchError::io(path, e))
}

pub fn write_report_json(report: &ExperimentReport, path: &Path) -> Result<()> {
    std::fs::write(path, report_to_json(report)).map_err(|e| BenchError::io(path, e))
}
