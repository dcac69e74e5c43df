//! Plot-ready tables for frontier and scan results, with CSV writers.
//!
//! Numbers are written in their shortest round-trip decimal form (at most 17
//! significant digits), so re-parsing the output recovers the values exactly.

use std::io::Write;

use chrono::NaiveDate;
use serde::Serialize;

use crate::frontier::{integrated_magnetization, FrontierCurve, LambdaGrid};
use crate::indicators::{carm, median_normalize, CarmConfig, IndicatorSeries};
use crate::ingest::PricePanel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierRow {
    pub lambda: f64,
    pub magnetization: f64,
    pub hamiltonian: f64,
    #[serde(rename = "return")]
    pub portfolio_return: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierSummary {
    pub window_end: NaiveDate,
    #[serde(rename = "M")]
    pub integrated_m: f64,
    #[serde(rename = "E")]
    pub zero_event: f64,
    #[serde(rename = "E_prime")]
    pub max_event: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub date: NaiveDate,
    #[serde(rename = "M")]
    pub integrated_m: f64,
    #[serde(rename = "E")]
    pub zero_event: f64,
    #[serde(rename = "E_prime")]
    pub max_event: f64,
    #[serde(rename = "carm_E")]
    pub carm_zero: f64,
    #[serde(rename = "carm_E_prime")]
    pub carm_max: f64,
    #[serde(rename = "carm_E_prime_normalized")]
    pub carm_max_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Median used to normalize `carm_E_prime`; `None` when the CARM series
    /// has no positive entry and was left unnormalized.
    pub carm_max_median: Option<f64>,
}

/// Rows of a frontier curve. Curves built without ground states have no
/// Hamiltonian, return or variance and yield no rows.
pub fn frontier_rows<T: Scalar>(curve: &FrontierCurve<T>) -> Vec<FrontierRow> {
    curve
        .states()
        .iter()
        .zip(curve.grid().values())
        .zip(curve.magnetizations())
        .map(|((s, l), m)| FrontierRow {
            lambda: l.as_f64(),
            magnetization: m.as_f64(),
            hamiltonian: s.hamiltonian_value.as_f64(),
            portfolio_return: s.portfolio_return.as_f64(),
            variance: s.portfolio_variance.as_f64(),
        })
        .collect()
}

pub fn frontier_summary<T: Scalar>(
    curve: &FrontierCurve<T>,
    window_end: NaiveDate,
) -> FrontierSummary {
    let events = curve.events();
    FrontierSummary {
        window_end,
        integrated_m: integrated_magnetization(curve).as_f64(),
        zero_event: events.zero_event.as_f64(),
        max_event: events.max_event.as_f64(),
    }
}

/// Indicator series with CARM columns: raw CARM of both events, and the
/// CARM of the saturation event normalized by its positive median.
pub fn scan_table<T: Scalar>(series: &IndicatorSeries<T>, carm_cfg: &CarmConfig) -> ScanTable {
    let carm_zero = carm(&series.zero_events(), carm_cfg);
    let carm_max = carm(&series.max_events(), carm_cfg);
    let normalized = median_normalize(&carm_max);
    let rows = series
        .points()
        .iter()
        .enumerate()
        .map(|(k, p)| ScanRow {
            date: p.date,
            integrated_m: p.integrated_m.as_f64(),
            zero_event: p.zero_event.as_f64(),
            max_event: p.max_event.as_f64(),
            carm_zero: carm_zero[k].as_f64(),
            carm_max: carm_max[k].as_f64(),
            carm_max_normalized: normalized.values[k].as_f64(),
        })
        .collect();
    ScanTable {
        rows,
        carm_max_median: normalized.median.map(Scalar::as_f64),
    }
}

/// Shortest decimal representation that parses back to the same `f64`.
pub fn format_number(value: f64) -> String {
    format!("{value:?}")
}

pub fn write_frontier_csv<W: Write>(
    out: W,
    summary: &FrontierSummary,
    rows: &[FrontierRow],
) -> std::io::Result<()> {
    let mut out = out;
    writeln!(out, "# window_end,M,E,E_prime")?;
    writeln!(
        out,
        "# {},{},{},{}",
        summary.window_end,
        format_number(summary.integrated_m),
        format_number(summary.zero_event),
        format_number(summary.max_event)
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "lambda",
        "magnetization",
        "hamiltonian",
        "return",
        "variance",
    ])?;
    for r in rows {
        w.write_record([
            format_number(r.lambda),
            format_number(r.magnetization),
            format_number(r.hamiltonian),
            format_number(r.portfolio_return),
            format_number(r.variance),
        ])?;
    }
    w.flush()
}

pub fn write_scan_csv<W: Write>(out: W, table: &ScanTable) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "date",
        "M",
        "E",
        "E_prime",
        "carm_E",
        "carm_E_prime",
        "carm_E_prime_normalized",
    ])?;
    for r in &table.rows {
        w.write_record([
            r.date.to_string(),
            format_number(r.integrated_m),
            format_number(r.zero_event),
            format_number(r.max_event),
            format_number(r.carm_zero),
            format_number(r.carm_max),
            format_number(r.carm_max_normalized),
        ])?;
    }
    w.flush()
}

/// Price table in the layout read by [`crate::parse_price_table`].
pub fn write_price_csv<W: Write, T: Scalar>(out: W, panel: &PricePanel<T>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("date").chain(panel.assets().iter().map(String::as_str)))?;
    for (date, row) in panel.dates().iter().zip(panel.prices().rows()) {
        let record =
            std::iter::once(date.to_string()).chain(row.iter().map(|p| format_number(p.as_f64())));
        w.write_record(record)?;
    }
    w.flush()
}

/// Heat-map grid: one row per window end, one column per λ, signed `m`.
pub fn write_curves_csv<W: Write, T: Scalar>(
    out: W,
    grid: &LambdaGrid<T>,
    series: &IndicatorSeries<T>,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header = std::iter::once("date".to_string())
        .chain(grid.values().iter().map(|l| format_number(l.as_f64())));
    w.write_record(header)?;
    for p in series.points() {
        let values = p.magnetization_curve.as_deref().unwrap_or(&[]);
        let record = std::iter::once(p.date.to_string())
            .chain(values.iter().map(|m| format_number(m.as_f64())));
        w.write_record(record)?;
    }
    w.flush()
}
