//! λ sweeps: the magnetization curve `m(λ)`, its integral `M`, and the two
//! cursor events read off the curve.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::MarketMoment;
use crate::model::LambdaValue;
use crate::scalar::Scalar;
use crate::solver::{
    enumerate_exact, solve_ground_state_seeded, GroundState, SignPattern, SolverConfig, Strategy,
};

/// `|m|` at or below this counts as a zero of the magnetization.
pub const ZERO_TOLERANCE: f64 = 1e-9;
/// `|m|` within this of the peak counts as attaining the absolute maximum.
pub const SATURATION_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_LAMBDA_POINTS: usize = 101;

/// Strictly increasing λ samples from 0 to 1 inclusive.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct LambdaGrid<T> {
    values: Vec<T>,
}

impl<T: Scalar> LambdaGrid<T> {
    /// `points` equally spaced values, `λ_k = k / (points − 1)`.
    pub fn uniform(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {points}"
            )));
        }
        let last = T::from_count(points - 1);
        Self::new((0..points).map(|k| T::from_count(k) / last).collect())
    }

    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid("need at least 2 points".into()));
        }
        if values[0] != T::zero() || values[values.len() - 1] != T::one() {
            return Err(Error::InvalidGrid(
                "grid must start at 0 and end at 1".into(),
            ));
        }
        if values
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater))
        {
            return Err(Error::InvalidGrid(
                "grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<T: Scalar> Default for LambdaGrid<T> {
    fn default() -> Self {
        Self::uniform(DEFAULT_LAMBDA_POINTS).expect("default grid is valid")
    }
}

/// Ground states and magnetizations along a λ grid for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierCurve<T> {
    grid: LambdaGrid<T>,
    states: Vec<GroundState<T>>,
    magnetizations: Vec<T>,
}

impl<T: Scalar> FrontierCurve<T> {
    pub fn from_states(grid: LambdaGrid<T>, states: Vec<GroundState<T>>) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: states.len(),
            });
        }
        let magnetizations = states.iter().map(GroundState::magnetization).collect();
        Ok(Self {
            grid,
            states,
            magnetizations,
        })
    }

    /// A bare curve without portfolios, e.g. for testing event detection.
    pub fn from_magnetizations(grid: LambdaGrid<T>, magnetizations: Vec<T>) -> Result<Self> {
        if magnetizations.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: magnetizations.len(),
            });
        }
        if let Some(m) = magnetizations
            .iter()
            .find(|m| m.abs().partial_cmp(&T::one()).is_none_or(Ordering::is_gt))
        {
            return Err(Error::InvalidGrid(format!(
                "magnetization {m} outside [-1, 1]"
            )));
        }
        Ok(Self {
            grid,
            states: Vec::new(),
            magnetizations,
        })
    }

    pub fn grid(&self) -> &LambdaGrid<T> {
        &self.grid
    }

    /// Empty for curves built with [`Self::from_magnetizations`].
    pub fn states(&self) -> &[GroundState<T>] {
        &self.states
    }

    pub fn magnetizations(&self) -> &[T] {
        &self.magnetizations
    }

    pub fn events(&self) -> EventOutcome<T> {
        EventOutcome {
            zero_event: detect_zero_event(self),
            max_event: detect_max_event(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventOutcome<T> {
    /// Smallest λ > 0 with `m(λ) = 0`, or 0 if the curve never vanishes.
    pub zero_event: T,
    /// Smallest λ at which `|m|` attains its maximum.
    pub max_event: T,
}

/// A zero of `m(λ)`; `lower == upper` when it falls on a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCrossing<T> {
    pub lambda: T,
    pub lower: usize,
    pub upper: usize,
}

/// Ground state for every grid point, seeding each local search with the
/// previous point's sign pattern.
pub fn sweep_frontier<T: Scalar>(
    moment: &MarketMoment<T>,
    grid: &LambdaGrid<T>,
    cfg: &SolverConfig,
) -> Result<FrontierCurve<T>> {
    sweep_frontier_with(moment, grid, cfg, Strategy::LocalSearch)
}

pub fn sweep_frontier_with<T: Scalar>(
    moment: &MarketMoment<T>,
    grid: &LambdaGrid<T>,
    cfg: &SolverConfig,
    strategy: Strategy,
) -> Result<FrontierCurve<T>> {
    let mut states: Vec<GroundState<T>> = Vec::with_capacity(grid.len());
    for &l in grid.values() {
        let at_lambda = |e: Error| Error::AtLambda {
            lambda: l.as_f64(),
            source: Box::new(e),
        };
        let lam = LambdaValue::new(l).map_err(at_lambda)?;
        let state = match strategy {
            Strategy::LocalSearch => {
                let warm: Vec<SignPattern> = states
                    .last()
                    .map(|s| s.sign_pattern())
                    .into_iter()
                    .collect();
                solve_ground_state_seeded(moment, lam, cfg, &warm)
            }
            Strategy::Exhaustive => enumerate_exact(moment, lam, cfg),
        }
        .map_err(at_lambda)?;
        states.push(state);
    }
    FrontierCurve::from_states(grid.clone(), states)
}

/// Trapezoidal `∫₀¹ m(λ) dλ`, clamped to `[-1, 1]` against round-off.
pub fn integrated_magnetization<T: Scalar>(curve: &FrontierCurve<T>) -> T {
    let half = T::lit(0.5);
    let lam = curve.grid.values();
    let m = &curve.magnetizations;
    let total: T = (1..lam.len())
        .map(|k| (lam[k] - lam[k - 1]) * (m[k] + m[k - 1]) * half)
        .sum();
    total.max(-T::one()).min(T::one())
}

/// Every zero of `m(λ)` above the first grid point, in increasing λ: grid
/// points with `|m| ≤ 1e-9`, and linear-interpolation roots between adjacent
/// points of opposite sign.
pub fn zero_crossings<T: Scalar>(curve: &FrontierCurve<T>) -> Vec<ZeroCrossing<T>> {
    let tol = T::tol(ZERO_TOLERANCE);
    let lam = curve.grid.values();
    let m = &curve.magnetizations;
    let mut out = Vec::new();
    for k in 1..m.len() {
        if m[k].abs() <= tol {
            out.push(ZeroCrossing {
                lambda: lam[k],
                lower: k,
                upper: k,
            });
            continue;
        }
        if let Some(&next) = m.get(k + 1) {
            if next.abs() > tol && (m[k] > T::zero()) != (next > T::zero()) {
                let frac = m[k] / (m[k] - next);
                out.push(ZeroCrossing {
                    lambda: lam[k] + (lam[k + 1] - lam[k]) * frac,
                    lower: k,
                    upper: k + 1,
                });
            }
        }
    }
    out
}

/// Zero-magnetization event: the smallest root from [`zero_crossings`], or 0.
pub fn detect_zero_event<T: Scalar>(curve: &FrontierCurve<T>) -> T {
    zero_crossings(curve)
        .first()
        .map_or(T::zero(), |c| c.lambda)
}

/// Saturation event: the smallest λ with `|m| ≥ max|m| − 1e-9`; 0 for a
/// curve that never leaves zero.
pub fn detect_max_event<T: Scalar>(curve: &FrontierCurve<T>) -> T {
    let tol = T::tol(SATURATION_TOLERANCE);
    let m = &curve.magnetizations;
    let peak = m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if peak <= tol {
        return T::zero();
    }
    m.iter()
        .position(|v| v.abs() >= peak - tol)
        .map_or(T::zero(), |k| curve.grid.values()[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolverConfig;
    use ndarray::{array, Array2};

    fn curve(m: Vec<f64>) -> FrontierCurve<f64> {
        let grid = LambdaGrid::uniform(m.len()).unwrap();
        FrontierCurve::from_magnetizations(grid, m).unwrap()
    }

    fn on_default_grid(f: impl Fn(f64) -> f64) -> FrontierCurve<f64> {
        let grid = LambdaGrid::<f64>::default();
        let m = grid.values().iter().map(|&l| f(l)).collect();
        FrontierCurve::from_magnetizations(grid, m).unwrap()
    }

    #[test]
    fn grid_validation() {
        let g = LambdaGrid::<f64>::default();
        assert_eq!(g.len(), 101);
        assert_eq!(g.values()[0], 0.0);
        assert_eq!(g.values()[100], 1.0);
        assert!((g.values()[1] - 0.01).abs() < 1e-17);
        assert!(LambdaGrid::<f64>::uniform(1).is_err());
        assert!(LambdaGrid::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(LambdaGrid::new(vec![0.1, 1.0]).is_err());
        assert!(LambdaGrid::new(vec![0.0, 0.9]).is_err());
    }

    #[test]
    fn integral_of_simple_curves() {
        assert!((integrated_magnetization(&on_default_grid(|_| 1.0)) - 1.0).abs() < 1e-14);
        assert_eq!(integrated_magnetization(&on_default_grid(|_| 0.0)), 0.0);
        assert!((integrated_magnetization(&on_default_grid(|l| l)) - 0.5).abs() < 1e-14);
        assert!((integrated_magnetization(&on_default_grid(|_| -1.0)) + 1.0).abs() < 1e-14);
        assert!(integrated_magnetization(&on_default_grid(|_| 1.0)) <= 1.0);
    }

    #[test]
    fn zero_event_cases() {
        let positive = on_default_grid(|l| if l == 0.0 { -0.3 } else { 0.2 + l / 2.0 });
        assert_eq!(detect_zero_event(&positive), 0.0);

        let crossing = on_default_grid(|l| if l < 0.305 { 0.4 } else { -0.2 });
        let e = detect_zero_event(&crossing);
        assert!((e - (0.3 + 0.01 * (0.4 / 0.6))).abs() < 1e-12, "{e}");
        let c = zero_crossings(&crossing);
        assert_eq!((c[0].lower, c[0].upper), (30, 31));

        assert_eq!(detect_zero_event(&on_default_grid(|_| 0.0)), 0.01);
    }

    #[test]
    fn zero_event_reports_smallest_of_several() {
        let c = curve(vec![0.0, 0.5, -0.5, 0.5, 0.0]);
        let all = zero_crossings(&c);
        assert_eq!(all.len(), 3);
        assert!((all[0].lambda - 0.375).abs() < 1e-15);
        assert!((all[1].lambda - 0.625).abs() < 1e-15);
        assert_eq!(all[2].lambda, 1.0);
        assert_eq!(detect_zero_event(&c), all[0].lambda);
    }

    #[test]
    fn max_event_cases() {
        assert_eq!(detect_max_event(&on_default_grid(|l| l)), 1.0);
        let sat = on_default_grid(|l| if l >= 0.415 { 1.0 } else { l });
        assert!((detect_max_event(&sat) - 0.42).abs() < 1e-15);
        assert_eq!(detect_max_event(&on_default_grid(|_| 0.0)), 0.0);
        let bear = on_default_grid(|l| -(l * 2.0).min(1.0));
        assert!((detect_max_event(&bear) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_asset_curve_is_flat() {
        let m = MarketMoment::<f64>::new(array![0.03], array![[0.002]]).unwrap();
        let c = sweep_frontier(&m, &LambdaGrid::default(), &SolverConfig::default()).unwrap();
        assert!(c.magnetizations().iter().all(|&v| v == 1.0));
        assert!((integrated_magnetization(&c) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_pair_stays_long() {
        let m = MarketMoment::<f64>::new(array![0.01, 0.01], Array2::eye(2)).unwrap();
        let c = sweep_frontier(
            &m,
            &LambdaGrid::uniform(21).unwrap(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(
            c.magnetizations().iter().all(|&v| v == 1.0),
            "{:?}",
            c.magnetizations()
        );
    }

    #[test]
    fn magnetizations_match_states() {
        let m = crate::synthetic::random_moment::<f64>(5, 24, 3).unwrap();
        let c = sweep_frontier(
            &m,
            &LambdaGrid::uniform(11).unwrap(),
            &SolverConfig::default(),
        )
        .unwrap();
        for (s, v) in c.states().iter().zip(c.magnetizations()) {
            assert_eq!(s.magnetization(), *v);
        }
    }

    #[test]
    fn sweep_errors_carry_lambda() {
        let m =
            MarketMoment::<f64>::new_unchecked(array![0.01, 0.02], array![[1.0, 2.0], [2.0, 1.0]])
                .unwrap();
        let err = sweep_frontier(
            &m,
            &LambdaGrid::uniform(3).unwrap(),
            &SolverConfig::default(),
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::AtLambda { lambda, .. } if lambda == 0.0),
            "{err}"
        );
    }
}
