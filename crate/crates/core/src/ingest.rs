//! Price tables, monthly resampling, returns, rolling windows and per-window
//! moment estimates.
//!
//! The input format is a wide CSV: a `date` column followed by one column per
//! asset, every cell populated with a strictly positive price.

use std::cmp::Ordering;
use std::io::Read;

use chrono::{Datelike, NaiveDate};
use ndarray::{s, Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Dated, complete matrix of positive prices (rows are dates, columns assets).
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel<T> {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    prices: Array2<T>,
}

impl<T: Scalar> PricePanel<T> {
    pub fn new(dates: Vec<NaiveDate>, assets: Vec<String>, prices: Array2<T>) -> Result<Self> {
        if prices.nrows() != dates.len() || prices.ncols() != assets.len() {
            return Err(Error::InvalidPanel(format!(
                "{}x{} price matrix for {} dates and {} assets",
                prices.nrows(),
                prices.ncols(),
                dates.len(),
                assets.len()
            )));
        }
        if dates.len() < 2 {
            return Err(Error::InvalidPanel(format!(
                "need at least 2 dates, got {}",
                dates.len()
            )));
        }
        if assets.len() < 2 {
            return Err(Error::InvalidPanel(format!(
                "need at least 2 assets, got {}",
                assets.len()
            )));
        }
        check_increasing(&dates)?;
        if let Some(((row, col), p)) = prices
            .indexed_iter()
            .find(|(_, p)| !(p.is_finite() && **p > T::zero()))
        {
            return Err(Error::InvalidPanel(format!(
                "price {p} for {} on {} is not strictly positive",
                assets[col], dates[row]
            )));
        }
        Ok(Self {
            dates,
            assets,
            prices,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn prices(&self) -> &Array2<T> {
        &self.prices
    }

    pub fn rows(&self) -> usize {
        self.dates.len()
    }
}

/// Simple per-period returns; each row is dated at the later price of its pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel<T> {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    returns: Array2<T>,
}

impl<T: Scalar> ReturnPanel<T> {
    /// Builds a panel directly from returns, e.g. for synthetic data.
    pub fn new(dates: Vec<NaiveDate>, assets: Vec<String>, returns: Array2<T>) -> Result<Self> {
        if returns.nrows() != dates.len() || returns.ncols() != assets.len() {
            return Err(Error::InvalidPanel(format!(
                "{}x{} return matrix for {} dates and {} assets",
                returns.nrows(),
                returns.ncols(),
                dates.len(),
                assets.len()
            )));
        }
        if assets.is_empty() {
            return Err(Error::InvalidPanel("no assets".into()));
        }
        check_increasing(&dates)?;
        if let Some(((row, col), r)) = returns
            .indexed_iter()
            .find(|(_, r)| !(r.is_finite() && **r > -T::one()))
        {
            return Err(Error::InvalidPanel(format!(
                "return {r} for {} on {} is not above -1",
                assets[col], dates[row]
            )));
        }
        Ok(Self {
            dates,
            assets,
            returns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn returns(&self) -> &Array2<T> {
        &self.returns
    }

    pub fn rows(&self) -> usize {
        self.dates.len()
    }

    /// Negates every return (used to mirror a regime). Fails if a return is
    /// at or above 1, whose negation would leave the valid domain.
    pub fn negated(&self) -> Result<Self> {
        Self::new(
            self.dates.clone(),
            self.assets.clone(),
            self.returns.mapv(|r| -r),
        )
    }
}

/// Mean return vector and covariance matrix of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketMoment<T> {
    mean_returns: Array1<T>,
    covariance: Array2<T>,
    verified: bool,
}

impl<T: Scalar> MarketMoment<T> {
    /// Validates shape, symmetry (1e-12 absolute) and positive
    /// semidefiniteness (eigenvalues ≥ −1e-10 relative to the largest).
    pub fn new(mean_returns: Array1<T>, covariance: Array2<T>) -> Result<Self> {
        let mut moment = Self::new_unchecked(mean_returns, covariance)?;
        moment.check_symmetric()?;
        moment.check_psd()?;
        moment.verified = true;
        Ok(moment)
    }

    /// Checks only dimensions. Solvers verify semidefiniteness themselves
    /// before using an unchecked moment.
    pub fn new_unchecked(mean_returns: Array1<T>, covariance: Array2<T>) -> Result<Self> {
        let n = mean_returns.len();
        if n == 0 {
            return Err(Error::InvalidPanel("moment with zero assets".into()));
        }
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: covariance.nrows().max(covariance.ncols()),
            });
        }
        Ok(Self {
            mean_returns,
            covariance,
            verified: false,
        })
    }

    pub(crate) fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn asset_count(&self) -> usize {
        self.mean_returns.len()
    }

    pub fn mean_returns(&self) -> &Array1<T> {
        &self.mean_returns
    }

    pub fn covariance(&self) -> &Array2<T> {
        &self.covariance
    }

    /// Same covariance, negated mean returns.
    pub fn mirrored(&self) -> Self {
        Self {
            mean_returns: self.mean_returns.mapv(|r| -r),
            covariance: self.covariance.clone(),
            verified: self.verified,
        }
    }

    fn check_symmetric(&self) -> Result<()> {
        let n = self.asset_count();
        let tol = T::tol(1e-12);
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (self.covariance[[i, j]] - self.covariance[[j, i]]).abs();
                if gap.partial_cmp(&tol).is_none_or(Ordering::is_gt) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        gap: gap.as_f64(),
                    });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_psd(&self) -> Result<()> {
        let values = linalg::symmetric_eigenvalues(&self.covariance);
        let largest = values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        let smallest = values.iter().fold(T::infinity(), |acc, v| acc.min(*v));
        if smallest < -T::tol(1e-10) * largest || !smallest.is_finite() {
            return Err(Error::NotPositiveSemidefinite {
                eigenvalue: smallest.as_f64(),
                largest: largest.as_f64(),
            });
        }
        Ok(())
    }
}

fn check_increasing(dates: &[NaiveDate]) -> Result<()> {
    for (k, pair) in dates.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(Error::DatesNotIncreasing {
                line: k as u64 + 2,
                date: pair[1],
                previous: pair[0],
            });
        }
    }
    Ok(())
}

/// Parses the wide price CSV (`date,<asset>,...` header, `YYYY-MM-DD` dates).
///
/// Line numbers in errors are 1-based and count the header as line 1.
pub fn parse_price_table<T: Scalar, R: Read>(input: R) -> Result<PricePanel<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(Error::MalformedHeader("empty input".into())),
    };
    let first = header.get(0).unwrap_or("").trim_start_matches('\u{feff}');
    if !first.eq_ignore_ascii_case("date") {
        return Err(Error::MalformedHeader(format!(
            "first column must be `date`, found `{first}`"
        )));
    }
    let assets: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if assets.len() < 2 {
        return Err(Error::MalformedHeader(format!(
            "need at least 2 asset columns, found {}",
            assets.len()
        )));
    }
    for (k, name) in assets.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::MalformedHeader(format!(
                "asset column {} has an empty name",
                k + 2
            )));
        }
        if assets[..k].contains(name) {
            return Err(Error::MalformedHeader(format!("duplicate asset `{name}`")));
        }
    }

    let mut dates = Vec::new();
    let mut values = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != assets.len() + 1 {
            return Err(Error::Row {
                line,
                message: format!("expected {} fields, found {}", assets.len() + 1, rec.len()),
            });
        }
        let raw_date = &rec[0];
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|e| Error::Cell {
            line,
            column: 1,
            asset: "date".into(),
            message: format!("invalid date `{raw_date}`: {e}"),
        })?;
        if let Some(&previous) = dates.last() {
            if date <= previous {
                return Err(Error::DatesNotIncreasing {
                    line,
                    date,
                    previous,
                });
            }
        }
        dates.push(date);
        for (k, cell) in rec.iter().skip(1).enumerate() {
            let cell_err = |message: String| Error::Cell {
                line,
                column: k + 2,
                asset: assets[k].clone(),
                message,
            };
            if cell.is_empty() {
                return Err(cell_err("missing price".into()));
            }
            let price: f64 = cell
                .parse()
                .map_err(|_| cell_err(format!("non-numeric price `{cell}`")))?;
            if !(price.is_finite() && price > 0.0) {
                return Err(cell_err(format!("price {cell} is not strictly positive")));
            }
            values.push(T::lit(price));
        }
    }
    let prices = Array2::from_shape_vec((dates.len(), assets.len()), values)
        .map_err(|e| Error::InvalidPanel(e.to_string()))?;
    PricePanel::new(dates, assets, prices)
}

/// Keeps the last observation of every calendar month present in the panel.
///
/// Fails only if the result would hold fewer than two months.
pub fn resample_monthly<T: Scalar>(panel: &PricePanel<T>) -> Result<PricePanel<T>> {
    let month_key = |d: &NaiveDate| (d.year(), d.month());
    let keep: Vec<usize> = (0..panel.rows())
        .filter(|&k| {
            k + 1 == panel.rows() || month_key(&panel.dates[k]) != month_key(&panel.dates[k + 1])
        })
        .collect();
    let dates = keep.iter().map(|&k| panel.dates[k]).collect();
    let prices = panel.prices.select(Axis(0), &keep);
    PricePanel::new(dates, panel.assets.clone(), prices)
}

/// `returns[t][i] = prices[t+1][i] / prices[t][i] - 1`.
pub fn compute_returns<T: Scalar>(panel: &PricePanel<T>) -> Result<ReturnPanel<T>> {
    if panel.rows() < 2 {
        return Err(Error::InsufficientHistory {
            required: 2,
            available: panel.rows(),
        });
    }
    let later = panel.prices.slice(s![1.., ..]);
    let earlier = panel.prices.slice(s![..-1, ..]);
    let returns = &later / &earlier - T::one();
    ReturnPanel::new(panel.dates[1..].to_vec(), panel.assets.clone(), returns)
}

/// Trailing window of `window_len` return rows ending at `end_index` (inclusive).
pub fn slice_window<T: Scalar>(
    panel: &ReturnPanel<T>,
    end_index: usize,
    window_len: usize,
) -> Result<ReturnPanel<T>> {
    if window_len < 2 {
        return Err(Error::InvalidConfig(format!(
            "window length must be at least 2, got {window_len}"
        )));
    }
    if end_index >= panel.rows() {
        return Err(Error::InvalidConfig(format!(
            "window end {end_index} beyond last row {}",
            panel.rows().saturating_sub(1)
        )));
    }
    if end_index + 1 < window_len {
        return Err(Error::InsufficientHistory {
            required: window_len,
            available: end_index + 1,
        });
    }
    let start = end_index + 1 - window_len;
    Ok(ReturnPanel {
        dates: panel.dates[start..=end_index].to_vec(),
        assets: panel.assets.clone(),
        returns: panel.returns.slice(s![start..=end_index, ..]).to_owned(),
    })
}

/// Sample mean and unbiased (1/(T−1)) sample covariance of a window.
pub fn estimate_moment<T: Scalar>(window: &ReturnPanel<T>) -> Result<MarketMoment<T>> {
    let rows = window.rows();
    if rows < 2 {
        return Err(Error::InsufficientHistory {
            required: 2,
            available: rows,
        });
    }
    let t = T::from_count(rows);
    let mean = window.returns.sum_axis(Axis(0)) / t;
    let centered = &window.returns - &mean;
    let raw = centered.t().dot(&centered) / (t - T::one());
    let covariance = (&raw + &raw.t()) * T::lit(0.5);
    MarketMoment::new(mean, covariance)
}
