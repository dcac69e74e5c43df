//! Rolling scans over time and the cumulative averaged rolling mean (CARM)
//! of event series.

use chrono::{Datelike, NaiveDate};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontier::{integrated_magnetization, sweep_frontier_with, LambdaGrid};
use crate::ingest::{estimate_moment, slice_window, ReturnPanel};
use crate::scalar::Scalar;
use crate::solver::{SolverConfig, Strategy};

/// Indicators of the window ending at `date`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorPoint<T> {
    pub date: NaiveDate,
    pub integrated_m: T,
    pub zero_event: T,
    pub max_event: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub magnetization_curve: Option<Vec<T>>,
}

/// Indicator points at consecutive calendar months.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorSeries<T> {
    points: Vec<IndicatorPoint<T>>,
}

impl<T: Scalar> IndicatorSeries<T> {
    pub fn new(points: Vec<IndicatorPoint<T>>) -> Result<Self> {
        for pair in points.windows(2) {
            let (a, b) = (pair[0].date, pair[1].date);
            if month_index(b) != month_index(a) + 1 {
                return Err(Error::InvalidPanel(format!(
                    "indicator dates must be consecutive months, {a} is followed by {b}"
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[IndicatorPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrated_m(&self) -> Vec<T> {
        self.points.iter().map(|p| p.integrated_m).collect()
    }

    pub fn zero_events(&self) -> Vec<T> {
        self.points.iter().map(|p| p.zero_event).collect()
    }

    pub fn max_events(&self) -> Vec<T> {
        self.points.iter().map(|p| p.max_event).collect()
    }
}

fn month_index(d: NaiveDate) -> i64 {
    i64::from(d.year()) * 12 + i64::from(d.month0())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CarmConfig {
    /// Horizon `N`: the filter looks back `N` measurement steps.
    pub horizon_n: usize,
    pub normalize_by_median: bool,
}

impl Default for CarmConfig {
    fn default() -> Self {
        Self {
            horizon_n: 12,
            normalize_by_median: false,
        }
    }
}

/// Frontier indicators for every trailing window of `window_len` rows.
pub fn rolling_scan<T: Scalar>(
    panel: &ReturnPanel<T>,
    window_len: usize,
    grid: &LambdaGrid<T>,
    cfg: &SolverConfig,
) -> Result<IndicatorSeries<T>> {
    rolling_scan_with(panel, window_len, grid, cfg, Strategy::LocalSearch)
}

pub fn rolling_scan_with<T: Scalar>(
    panel: &ReturnPanel<T>,
    window_len: usize,
    grid: &LambdaGrid<T>,
    cfg: &SolverConfig,
    strategy: Strategy,
) -> Result<IndicatorSeries<T>> {
    if panel.rows() < window_len {
        return Err(Error::InsufficientHistory {
            required: window_len,
            available: panel.rows(),
        });
    }
    let mut points = Vec::with_capacity(panel.rows() + 1 - window_len);
    for end in (window_len - 1)..panel.rows() {
        let date = panel.dates()[end];
        let point = (|| {
            let window = slice_window(panel, end, window_len)?;
            let moment = estimate_moment(&window)?;
            let curve = sweep_frontier_with(&moment, grid, cfg, strategy)?;
            let events = curve.events();
            Ok(IndicatorPoint {
                date,
                integrated_m: integrated_magnetization(&curve),
                zero_event: events.zero_event,
                max_event: events.max_event,
                magnetization_curve: Some(curve.magnetizations().to_vec()),
            })
        })()
        .map_err(|e: Error| Error::AtDate {
            date,
            source: Box::new(e),
        })?;
        points.push(point);
    }
    IndicatorSeries::new(points)
}

/// `CARM(t) = (1/N) Σ_{i=1..N} Σ_{j=0..i} E(t − j) / i`.
///
/// The inner sum runs over `i + 1` terms; values before the start of the
/// series count as zero.
pub fn carm<T: Scalar>(events: &[T], cfg: &CarmConfig) -> Vec<T> {
    let n = cfg.horizon_n.max(1);
    let horizon = T::from_count(n);
    (0..events.len())
        .map(|t| {
            let mut total = T::zero();
            for i in 1..=n {
                let inner: T = (0..=i.min(t)).map(|j| events[t - j]).sum();
                total = total + inner / T::from_count(i);
            }
            total / horizon
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized<T> {
    pub values: Vec<T>,
    /// Median of the strictly positive entries; `None` if there are none and
    /// the series was returned unchanged.
    pub median: Option<T>,
}

impl<T> Normalized<T> {
    pub fn is_degenerate(&self) -> bool {
        self.median.is_none()
    }
}

/// Divides by the median of the strictly positive entries.
pub fn median_normalize<T: Scalar>(series: &[T]) -> Normalized<T> {
    let mut positive: Vec<T> = series.iter().copied().filter(|v| *v > T::zero()).collect();
    if positive.is_empty() {
        return Normalized {
            values: series.to_vec(),
            median: None,
        };
    }
    positive.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mid = positive.len() / 2;
    let q = if positive.len() % 2 == 1 {
        positive[mid]
    } else {
        (positive[mid - 1] + positive[mid]) * T::lit(0.5)
    };
    Normalized {
        values: series.iter().map(|v| *v / q).collect(),
        median: Some(q),
    }
}

/// CARM of `events`, median-normalized when the config asks for it.
pub fn carm_series<T: Scalar>(events: &[T], cfg: &CarmConfig) -> Normalized<T> {
    let raw = carm(events, cfg);
    if cfg.normalize_by_median {
        median_normalize(&raw)
    } else {
        Normalized {
            values: raw,
            median: None,
        }
    }
}
