//! CSV input/output: the 61-feature per-packet schema (RFC 4180 quoting,
//! mandatory header row), experiment result tables, and metric reports.

use std::io;
use std::path::Path;

use fpa_core::features::{render_row, FeatureProfile, FeatureRecord};
use fpa_core::socsim::ExperimentRow;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty csv: {0}")]
    Empty(String),
}

/// Label columns appended when the operator supplies `--label`: Attack_label
/// is 0 for "Normal", 1 otherwise; Attack_type carries the name itself.
#[derive(Debug, Clone)]
pub struct LabelSpec {
    pub attack_type: String,
}

impl LabelSpec {
    pub fn attack_label(&self) -> u8 {
        u8::from(self.attack_type != "Normal")
    }
}

/// Write feature records under a column profile; deterministic byte-for-byte
/// given identical inputs.
pub fn write_feature_csv<W: io::Write>(
    out: W,
    records: &[FeatureRecord],
    profile: &FeatureProfile,
    label: Option<&LabelSpec>,
) -> Result<(), CsvError> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<String> = profile
        .columns()
        .iter()
        .map(|c| c.name.to_string())
        .collect();
    if label.is_some() {
        header.push("Attack_label".into());
        header.push("Attack_type".into());
    }
    writer.write_record(&header)?;
    for record in records {
        let mut row = render_row(record, profile);
        if let Some(spec) = label {
            row.push(spec.attack_label().to_string());
            row.push(spec.attack_type.clone());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_feature_csv_file<P: AsRef<Path>>(
    path: P,
    records: &[FeatureRecord],
    profile: &FeatureProfile,
    label: Option<&LabelSpec>,
) -> Result<(), CsvError> {
    write_feature_csv(std::fs::File::create(path)?, records, profile, label)
}

/// A loaded CSV: header plus rows of strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }
}

pub fn read_csv<R: io::Read>(input: R) -> Result<CsvTable, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let columns: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(|s| s.to_string()).collect());
    }
    Ok(CsvTable { columns, rows })
}

pub fn read_csv_file<P: AsRef<Path>>(path: P) -> Result<CsvTable, CsvError> {
    let table = read_csv(std::fs::File::open(&path)?)?;
    if table.columns.is_empty() {
        return Err(CsvError::Empty(path.as_ref().display().to_string()));
    }
    Ok(table)
}

/// Plot-ready experiment results: one row per sweep cell, waits in both hours
/// and seconds.
pub fn write_experiment_csv<W: io::Write>(out: W, rows: &[ExperimentRow]) -> Result<(), CsvError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "fp_percent",
        "eta_per_hr",
        "mu_per_hr",
        "servers",
        "horizon_hr",
        "mean_cum_tp_wait_hr",
        "mean_cum_tp_wait_s",
        "mean_tp_wait_s",
        "mean_served",
        "mean_truncated",
    ])?;
    for row in rows {
        writer.write_record(&[
            format!("{}", row.fp),
            format!("{}", row.eta),
            format!("{}", row.mu),
            format!("{}", row.c),
            format!("{}", row.horizon),
            format!("{:.6}", row.mean_cum_wait),
            format!("{:.3}", row.mean_cum_wait * 3600.0),
            format!("{:.3}", row.mean_wait * 3600.0),
            format!("{:.1}", row.mean_served),
            format!("{:.1}", row.mean_truncated),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Metric report: metric,value pairs.
pub fn write_metric_csv<W: io::Write>(out: W, metrics: &[(String, f64)]) -> Result<(), CsvError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["metric", "value"])?;
    for (name, value) in metrics {
        writer.write_record(&[name.clone(), format!("{value:.6}")])?;
    }
    writer.flush()?;
    Ok(())
}
