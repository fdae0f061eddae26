//! Benchmark report rows. One row per run, with the same columns in CSV and
//! JSON so downstream tooling can consume either. Every cell is derived from
//! (config, seed) except `throughput`, which is wall-clock and therefore only
//! filled by the throughput benchmark.

use std::io::Write;

use bfsk::api::params::VariantParams;
use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub variant: String,
    /// Total allocated bits; equals the classic `m` for plain bit arrays.
    pub m: u64,
    /// Hash count, when the variant has a single well-defined one.
    pub k: Option<u64>,
    /// Live items at measurement time.
    pub n: u64,
    pub bits_per_element: f64,
    pub predicted_fpp: Option<f64>,
    pub measured_fpp: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    /// Queries per second; empty for rate-only benchmarks.
    pub throughput: Option<f64>,
}

pub const CSV_HEADER: [&str; 10] = [
    "variant",
    "m",
    "k",
    "n",
    "bits_per_element",
    "predicted_fpp",
    "measured_fpp",
    "ci_lo",
    "ci_hi",
    "throughput",
];

/// The hash count a reader would expect in the `k` column, when unambiguous.
pub fn hash_count(params: &VariantParams) -> Option<u64> {
    let k = match params {
        VariantParams::Standard { k, .. }
        | VariantParams::Counting { k, .. }
        | VariantParams::Spectral { k, .. }
        | VariantParams::Adaptive { k, .. }
        | VariantParams::YesNo { k, .. }
        | VariantParams::ViCbf { k, .. }
        | VariantParams::FpCbf { k, .. }
        | VariantParams::Retouched { k, .. }
        | VariantParams::Acbf { k, .. }
        | VariantParams::Complement { k, .. }
        | VariantParams::Bfah { k, .. }
        | VariantParams::Matrix { k, .. }
        | VariantParams::Ohbf { k, .. }
        | VariantParams::Dynamic { k, .. }
        | VariantParams::Iblt { k, .. }
        | VariantParams::Shifting { k, .. }
        | VariantParams::Deletable { k, .. }
        | VariantParams::DistanceSensitive { k, .. }
        | VariantParams::Persistent { k, .. }
        | VariantParams::Hdbf { k, .. } => *k,
        VariantParams::Weighted { k_avg, .. } => *k_avg,
        // several hash groups or none at all: leave the column empty
        VariantParams::Generalized { .. }
        | VariantParams::MultiClass { .. }
        | VariantParams::DlCbf { .. }
        | VariantParams::Compacted { .. }
        | VariantParams::Ufbf { .. }
        | VariantParams::Cuckoo { .. } => return None,
    };
    Some(k as u64)
}

fn rate_cell(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.6e}")).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ReportRow], sink: W) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record([
            row.variant.clone(),
            row.m.to_string(),
            row.k.map(|k| k.to_string()).unwrap_or_default(),
            row.n.to_string(),
            format!("{:.4}", row.bits_per_element),
            rate_cell(row.predicted_fpp),
            rate_cell(row.measured_fpp),
            rate_cell(row.ci_lo),
            rate_cell(row.ci_hi),
            row.throughput
                .map(|t| format!("{t:.1}"))
                .unwrap_or_default(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn render_csv(rows: &[ReportRow]) -> Result<String, CliError> {
    let mut buffer = Vec::new();
    write_csv(rows, &mut buffer)?;
    Ok(String::from_utf8(buffer).expect("csv output is utf-8"))
}

pub fn render_json(rows: &[ReportRow]) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(rows)?;
    text.push('\n');
    Ok(text)
}
