//! Market-state indicators from ground-state mean-variance portfolios.
//!
//! For a window of returns with mean vector `R` and covariance `C`, the
//! Hamiltonian `H_λ(σ) = −λ Rᵀσ + (1−λ) σᵀCσ` is minimized over the L1 unit
//! sphere `Σ|σ_i| = 1` (short selling allowed) for every λ on a grid. The net
//! exposure `m = Σσ_i` of the ground states traces a magnetization curve
//! whose integral and cursor events summarize whether the efficient frontier
//! leans long (bullish) or short (bearish). Rolling the window through time
//! and filtering the events with CARM yields the indicator series.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the CLI uses.

pub mod error;
pub mod frontier;
pub mod indicators;
pub mod ingest;
mod linalg;
pub mod model;
pub mod report;
pub mod scalar;
pub mod selftest;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
pub use frontier::{
    detect_max_event, detect_zero_event, integrated_magnetization, sweep_frontier,
    sweep_frontier_with, zero_crossings, EventOutcome, FrontierCurve, LambdaGrid, ZeroCrossing,
};
pub use indicators::{
    carm, carm_series, median_normalize, rolling_scan, rolling_scan_with, CarmConfig,
    IndicatorPoint, IndicatorSeries, Normalized,
};
pub use ingest::{
    compute_returns, estimate_moment, parse_price_table, resample_monthly, slice_window,
    MarketMoment, PricePanel, ReturnPanel,
};
pub use model::{
    hamiltonian, magnetization, portfolio_return, portfolio_variance, validate_budget, LambdaValue,
    Portfolio,
};
pub use scalar::Scalar;
pub use solver::{
    enumerate_exact, grid_oracle, solve_ground_state, solve_ground_state_seeded, solve_orthant,
    GroundState, Method, Sign, SignPattern, SolverConfig, Strategy,
};

pub type PricePanel64 = PricePanel<f64>;
pub type ReturnPanel64 = ReturnPanel<f64>;
pub type MarketMoment64 = MarketMoment<f64>;
pub type Portfolio64 = Portfolio<f64>;
pub type Lambda64 = LambdaValue<f64>;
pub type GroundState64 = GroundState<f64>;
pub type LambdaGrid64 = LambdaGrid<f64>;
pub type FrontierCurve64 = FrontierCurve<f64>;
pub type IndicatorSeries64 = IndicatorSeries<f64>;

pub type PricePanel32 = PricePanel<f32>;
pub type ReturnPanel32 = ReturnPanel<f32>;
pub type MarketMoment32 = MarketMoment<f32>;
pub type Portfolio32 = Portfolio<f32>;
pub type GroundState32 = GroundState<f32>;
pub type FrontierCurve32 = FrontierCurve<f32>;
