//! Times a full rolling scan at 30 assets, 12-month windows and 101 λ.
//!
//! Usage: `paper_scale [rows] [restarts] [seed]`.

use std::time::Instant;

use spinfolio::synthetic::{default_start, FactorMarket};
use spinfolio::{rolling_scan, LambdaGrid64, ReturnPanel64, SolverConfig};

fn main() -> spinfolio::Result<()> {
    let arg = |k: usize, default: u64| {
        std::env::args()
            .nth(k)
            .and_then(|s| s.parse().ok())
            .unwrap_or(default)
    };
    let rows = arg(1, 180) as usize;
    let cfg = SolverConfig {
        random_restarts: arg(2, 8) as usize,
        ..SolverConfig::default()
    };
    let market = FactorMarket::new(30, arg(3, 1010));
    let drift: Vec<f64> = (0..rows).map(|t| 0.01 * (t as f64 / 30.0).sin()).collect();
    let panel: ReturnPanel64 = market.return_panel(default_start(), &drift)?;
    let start = Instant::now();
    let series = rolling_scan(&panel, 12, &LambdaGrid64::default(), &cfg)?;
    let m: f64 = series.integrated_m().iter().sum();
    println!(
        "{} windows in {:.2?}; sum of M = {m:.6}",
        series.len(),
        start.elapsed(),
    );
    Ok(())
}
