//! Seeded synthetic markets: one-factor monthly returns with configurable
//! drift, used by the self-test, the acceptance suite and the `synth` command.

use chrono::{Datelike, Months, NaiveDate};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ingest::{estimate_moment, MarketMoment, PricePanel, ReturnPanel};
use crate::scalar::Scalar;

/// One-factor return model: `r_ti = drift_t + β_i f_t + ε_ti`.
#[derive(Debug, Clone)]
pub struct FactorMarket {
    pub assets: usize,
    /// Monthly volatility of the common factor.
    pub factor_vol: f64,
    /// Monthly idiosyncratic volatility.
    pub idiosyncratic_vol: f64,
    pub seed: u64,
}

impl FactorMarket {
    pub fn new(assets: usize, seed: u64) -> Self {
        Self {
            assets,
            factor_vol: 0.03,
            idiosyncratic_vol: 0.04,
            seed,
        }
    }

    /// Return matrix with one row per entry of `drift`.
    pub fn returns(&self, drift: &[f64]) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let betas: Vec<f64> = (0..self.assets)
            .map(|_| rng.random_range(0.5..1.5))
            .collect();
        let factor = Normal::new(0.0, self.factor_vol).expect("finite volatility");
        let noise = Normal::new(0.0, self.idiosyncratic_vol).expect("finite volatility");
        let mut out = Array2::zeros((drift.len(), self.assets));
        for (t, mu) in drift.iter().enumerate() {
            let f = factor.sample(&mut rng);
            for i in 0..self.assets {
                // Keep simple returns inside (−1, ∞) even for extreme draws.
                out[[t, i]] = (mu + betas[i] * f + noise.sample(&mut rng)).max(-0.95);
            }
        }
        out
    }

    /// Monthly return panel with month-end dates starting at `first_month`.
    pub fn return_panel<T: Scalar>(
        &self,
        first_month: NaiveDate,
        drift: &[f64],
    ) -> Result<ReturnPanel<T>> {
        let returns = self.returns(drift).mapv(T::lit);
        ReturnPanel::new(
            month_ends(first_month, drift.len()),
            asset_names(self.assets),
            returns,
        )
    }

    /// Prices compounded from 100 with one extra leading month, so that the
    /// returns of the result reproduce [`Self::returns`].
    pub fn price_panel<T: Scalar>(
        &self,
        first_month: NaiveDate,
        drift: &[f64],
    ) -> Result<PricePanel<T>> {
        let returns = self.returns(drift);
        let rows = drift.len() + 1;
        let mut prices = Array2::zeros((rows, self.assets));
        prices.row_mut(0).fill(100.0);
        for t in 1..rows {
            for i in 0..self.assets {
                prices[[t, i]] = prices[[t - 1, i]] * (1.0 + returns[[t - 1, i]]);
            }
        }
        PricePanel::new(
            month_ends(first_month, rows),
            asset_names(self.assets),
            prices.mapv(T::lit),
        )
    }
}

/// Drift path of `bull` months at `+drift` followed by `bear` months at `−drift`.
pub fn regime_drift(bull: usize, bear: usize, drift: f64) -> Vec<f64> {
    std::iter::repeat_n(drift, bull)
        .chain(std::iter::repeat_n(-drift, bear))
        .collect()
}

/// Moment of `rows` synthetic returns with asset-specific drifts in ±3%/month.
pub fn random_moment<T: Scalar>(assets: usize, rows: usize, seed: u64) -> Result<MarketMoment<T>> {
    if rows < 2 || assets == 0 {
        return Err(Error::InvalidConfig(format!(
            "random moment needs ≥ 1 asset and ≥ 2 rows, got {assets} and {rows}"
        )));
    }
    let market = FactorMarket::new(assets, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let tilt: Array1<f64> = (0..assets).map(|_| rng.random_range(-0.03..0.03)).collect();
    let returns = market.returns(&vec![0.0; rows]) + &tilt;
    let panel = ReturnPanel::new(
        month_ends(default_start(), rows),
        asset_names(assets),
        returns.mapv(T::lit),
    )?;
    estimate_moment(&panel)
}

pub fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 31).expect("valid date")
}

/// Consecutive month-end dates beginning with the month of `first`.
pub fn month_ends(first: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let base = NaiveDate::from_ymd_opt(first.year(), first.month(), 1).expect("valid month");
    (0..count)
        .map(|k| base + Months::new(k as u32 + 1) - chrono::Days::new(1))
        .collect()
}

pub fn asset_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("A{i:02}")).collect()
}
