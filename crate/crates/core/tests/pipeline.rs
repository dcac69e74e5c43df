use spinfolio::synthetic::{default_start, regime_drift, FactorMarket};
use spinfolio::{
    compute_returns, rolling_scan, rolling_scan_with, Error, LambdaGrid, LambdaGrid64,
    ReturnPanel64, SolverConfig, Strategy,
};

fn market(assets: usize, seed: u64) -> FactorMarket {
    FactorMarket {
        assets,
        factor_vol: 0.02,
        idiosyncratic_vol: 0.02,
        seed,
    }
}

#[test]
fn one_point_per_full_window() {
    let panel: ReturnPanel64 = market(5, 1)
        .return_panel(default_start(), &vec![0.0; 36])
        .unwrap();
    let grid = LambdaGrid64::uniform(11).unwrap();
    let series = rolling_scan(&panel, 12, &grid, &SolverConfig::default()).unwrap();
    assert_eq!(series.len(), 25);
    assert_eq!(series.points()[0].date, panel.dates()[11]);
    assert_eq!(series.points()[24].date, panel.dates()[35]);
    for p in series.points() {
        assert_eq!(p.magnetization_curve.as_ref().map(Vec::len), Some(11));
    }
}

#[test]
fn short_history_is_rejected() {
    let panel: ReturnPanel64 = market(4, 2)
        .return_panel(default_start(), &[0.0; 11])
        .unwrap();
    let grid = LambdaGrid64::uniform(5).unwrap();
    assert!(matches!(
        rolling_scan(&panel, 12, &grid, &SolverConfig::default()),
        Err(Error::InsufficientHistory {
            required: 12,
            available: 11
        })
    ));
}

#[test]
fn bull_market_is_long_and_its_mirror_short() {
    let prices = market(5, 3)
        .price_panel::<f64>(default_start(), &regime_drift(24, 0, 0.02))
        .unwrap();
    let panel = compute_returns(&prices).unwrap();
    let grid = LambdaGrid64::uniform(51).unwrap();
    let cfg = SolverConfig::default();
    let up = rolling_scan_with(&panel, 12, &grid, &cfg, Strategy::Exhaustive).unwrap();
    let down = rolling_scan_with(
        &panel.negated().unwrap(),
        12,
        &grid,
        &cfg,
        Strategy::Exhaustive,
    )
    .unwrap();
    for (a, b) in up.points().iter().zip(down.points()) {
        assert!(a.integrated_m > 0.0, "{}: M = {}", a.date, a.integrated_m);
        assert!((a.integrated_m + b.integrated_m).abs() < 1e-8);
        assert!((a.max_event - b.max_event).abs() <= 0.02 + 1e-12);
    }
}

#[test]
fn heuristic_and_exhaustive_scans_agree_on_small_panels() {
    let panel: ReturnPanel64 = market(6, 4)
        .return_panel(default_start(), &regime_drift(12, 12, 0.01))
        .unwrap();
    let grid = LambdaGrid64::uniform(21).unwrap();
    let cfg = SolverConfig::default();
    let a = rolling_scan_with(&panel, 12, &grid, &cfg, Strategy::LocalSearch).unwrap();
    let b = rolling_scan_with(&panel, 12, &grid, &cfg, Strategy::Exhaustive).unwrap();
    for (x, y) in a.points().iter().zip(b.points()) {
        assert!((x.integrated_m - y.integrated_m).abs() < 1e-8, "{}", x.date);
    }
}

#[test]
fn single_precision_pipeline() {
    let panel = market(4, 5)
        .return_panel::<f32>(default_start(), &regime_drift(18, 0, 0.02))
        .unwrap();
    let grid = LambdaGrid::<f32>::uniform(21).unwrap();
    let series = rolling_scan(&panel, 12, &grid, &SolverConfig::default()).unwrap();
    assert_eq!(series.len(), 7);
    for p in series.points() {
        assert!(p.integrated_m > 0.0 && p.integrated_m <= 1.0);
    }
}
