//! Built-in consistency checks of the solver and indicator pipeline on
//! seeded synthetic instances.
//!
//! Every check compares the configured solver against an independent
//! reference (brute force, closed form, or a re-derived optimality
//! condition) with fixed tolerances, so a mis-configured solver shows up as
//! a named failing property. Runs are deterministic for a given config.

use std::fmt;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::frontier::{integrated_magnetization, sweep_frontier_with, FrontierCurve, LambdaGrid};
use crate::indicators::{carm, CarmConfig};
use crate::ingest::MarketMoment;
use crate::model::{hamiltonian, validate_budget, LambdaValue, BUDGET_TOLERANCE};
use crate::solver::{
    enumerate_exact, grid_oracle, solve_ground_state, GroundState, SolverConfig, Strategy,
};
use crate::synthetic::random_moment;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestConfig {
    pub solver: SolverConfig,
    pub seed: u64,
    /// Random instances per check.
    pub instances: usize,
}

impl Default for SelfTestConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            seed: 0,
            instances: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub checks: Vec<CheckResult>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for SelfTestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{status} {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

const EQUIVALENCE_REL: f64 = 1e-8;
const EQUIVALENCE_FLOOR: f64 = 1e-15;
const GRID_RESOLUTION: usize = 200;
const GRID_GAP: f64 = 5e-3;
const KKT_LIMIT: f64 = 1e-7;
const SYMMETRY_TOL: f64 = 1e-8;
const MONOTONE_TOL: f64 = 1e-9;
const CARM_TOL: f64 = 1e-12;

/// Largest violation seen so far, with the instance that produced it.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: String::new(),
        }
    }

    fn record(&mut self, value: f64, at: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.at = at();
        }
    }

    fn check(self, name: &'static str, limit: f64) -> CheckResult {
        let passed = self.value <= limit;
        let detail = if self.at.is_empty() {
            format!("no violation (limit {limit:e})")
        } else {
            format!("worst {:e} at {} (limit {limit:e})", self.value, self.at)
        };
        CheckResult {
            name,
            passed,
            detail,
        }
    }
}

struct Instance {
    label: String,
    moment: MarketMoment<f64>,
    lambda: LambdaValue<f64>,
}

fn instances(cfg: &SelfTestConfig, sizes: &[usize], salt: u64) -> Result<Vec<Instance>> {
    let count = cfg.instances.max(2);
    (0..count)
        .map(|k| {
            let n = sizes[k % sizes.len()];
            let seed = cfg
                .seed
                .wrapping_mul(1_000_003)
                .wrapping_add(salt * 10_007 + k as u64);
            let lam = k as f64 / (count - 1) as f64;
            Ok(Instance {
                label: format!("instance {k} (N={n}, λ={lam:.4})"),
                moment: random_moment(n, 24, seed)?,
                lambda: LambdaValue::new(lam)?,
            })
        })
        .collect()
}

/// Runs every check and collects the outcomes. Solver errors abort the run.
pub fn run(cfg: &SelfTestConfig) -> Result<SelfTestReport> {
    cfg.solver.validate()?;
    let mut checks = Vec::new();
    let mut budget = Worst::new();
    let mut bounds = Worst::new();

    let note_state = |s: &GroundState<f64>, label: &str, budget: &mut Worst| {
        budget.record((s.portfolio.l1_norm() - 1.0).abs(), || label.to_string());
    };

    // Heuristic against exhaustive orthant enumeration.
    let mut equivalence = Worst::new();
    let mut kkt = Worst::new();
    let mut dominance = Worst::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    for inst in instances(cfg, &[2, 3, 4, 5, 6], 1)? {
        let heuristic = solve_ground_state(&inst.moment, inst.lambda, &cfg.solver)?;
        let exact = enumerate_exact(&inst.moment, inst.lambda, &cfg.solver)?;
        note_state(&heuristic, &inst.label, &mut budget);
        note_state(&exact, &inst.label, &mut budget);
        let (h, e) = (heuristic.hamiltonian_value, exact.hamiltonian_value);
        equivalence.record((h - e).abs() / e.abs().max(EQUIVALENCE_FLOOR), || {
            inst.label.clone()
        });
        kkt.record(stationarity_violation(&heuristic, &inst.moment), || {
            inst.label.clone()
        });
        for _ in 0..200 {
            let w = random_sphere_point(&mut rng, inst.moment.asset_count());
            let p = validate_budget(w)?;
            let other = hamiltonian(&p, &inst.moment, inst.lambda)?;
            dominance.record(h - other, || inst.label.clone());
        }
    }
    // The gap is relative to |H_exact|, or absolute below the floor.
    checks.push(equivalence.check("oracle_equivalence", EQUIVALENCE_REL));
    checks.push(kkt.check("kkt_stationarity", KKT_LIMIT));
    checks.push(dominance.check("random_portfolio_dominance", 1e-12));

    // Exhaustive enumeration against the weight-grid search.
    let mut grid_gap = Worst::new();
    let mut grid_below = Worst::new();
    for inst in instances(cfg, &[2, 3], 2)? {
        let exact = enumerate_exact(&inst.moment, inst.lambda, &cfg.solver)?;
        let grid = grid_oracle(&inst.moment, inst.lambda, GRID_RESOLUTION)?;
        note_state(&grid, &inst.label, &mut budget);
        let gap = grid.hamiltonian_value - exact.hamiltonian_value;
        grid_gap.record(gap, || inst.label.clone());
        grid_below.record(-gap, || inst.label.clone());
    }
    checks.push(grid_gap.check("grid_oracle_gap", GRID_GAP));
    checks.push(grid_below.check("exact_not_beaten_by_grid", 1e-12));

    // At λ = 1 the ground state is the asset with the largest |R_k|.
    let mut closed_form = Worst::new();
    for inst in instances(cfg, &[2, 4, 7, 10], 3)? {
        let state = solve_ground_state(&inst.moment, LambdaValue::new(1.0)?, &cfg.solver)?;
        note_state(&state, &inst.label, &mut budget);
        let r = inst.moment.mean_returns();
        let k = (0..r.len()).fold(
            0,
            |best, i| if r[i].abs() > r[best].abs() { i } else { best },
        );
        let mut expected = Array1::zeros(r.len());
        expected[k] = r[k].signum();
        let distance = (state.portfolio.weights() - &expected)
            .iter()
            .fold(0.0f64, |acc, d| acc.max(d.abs()));
        closed_form.record(distance, || inst.label.clone());
    }
    checks.push(closed_form.check("lambda_one_closed_form", 0.0));

    // Sweeps: sign symmetry, frontier monotonicity and bounds.
    let grid = LambdaGrid::uniform(21)?;
    let step = 1.0 / 20.0;
    let mut symmetry = Worst::new();
    let mut events = Worst::new();
    let mut monotone = Worst::new();
    for inst in instances(cfg, &[3, 4, 5], 4)?.iter().take(6) {
        let curve = sweep_frontier_with(&inst.moment, &grid, &cfg.solver, Strategy::LocalSearch)?;
        let mirror = sweep_frontier_with(
            &inst.moment.mirrored(),
            &grid,
            &cfg.solver,
            Strategy::LocalSearch,
        )?;
        let exact = sweep_frontier_with(&inst.moment, &grid, &cfg.solver, Strategy::Exhaustive)?;
        for c in [&curve, &mirror, &exact] {
            for s in c.states() {
                note_state(s, &inst.label, &mut budget);
            }
            record_bounds(c, &inst.label, &mut bounds);
        }
        for (a, b) in curve.magnetizations().iter().zip(mirror.magnetizations()) {
            symmetry.record((a + b).abs(), || inst.label.clone());
        }
        let m = integrated_magnetization(&curve) + integrated_magnetization(&mirror);
        symmetry.record(m.abs(), || inst.label.clone());
        let (e1, e2) = (curve.events(), mirror.events());
        events.record((e1.zero_event - e2.zero_event).abs(), || inst.label.clone());
        events.record((e1.max_event - e2.max_event).abs(), || inst.label.clone());
        for pair in exact.states().windows(2) {
            let drop_r = pair[0].portfolio_return - pair[1].portfolio_return;
            let drop_v = pair[0].portfolio_variance - pair[1].portfolio_variance;
            monotone.record(drop_r.max(drop_v), || inst.label.clone());
        }
    }
    checks.push(symmetry.check("antisymmetry", SYMMETRY_TOL));
    checks.push(events.check("event_symmetry", step + 1e-12));
    checks.push(monotone.check("frontier_monotonicity", MONOTONE_TOL));
    checks.push(bounds.check("magnetization_bounds", 0.0));
    checks.push(budget.check("budget_constraint", BUDGET_TOLERANCE));

    // CARM against its closed forms.
    let mut carm_const = Worst::new();
    for n in [1usize, 2, 5, 12] {
        let harmonic: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
        let expected = 1.0 + harmonic / n as f64;
        let cfg_n = CarmConfig {
            horizon_n: n,
            normalize_by_median: false,
        };
        let out = carm(&vec![1.0; 3 * n + 2], &cfg_n);
        carm_const.record((out[out.len() - 1] - expected).abs(), || format!("N={n}"));
    }
    checks.push(carm_const.check("carm_closed_form", CARM_TOL));

    let mut linear = Worst::new();
    for trial in 0..cfg.instances.max(1) {
        let len = rng.random_range(1..40);
        let n = rng.random_range(1..15);
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (a, b): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let cfg_n = CarmConfig {
            horizon_n: n,
            normalize_by_median: false,
        };
        let (cx, cy, cm) = (carm(&x, &cfg_n), carm(&y, &cfg_n), carm(&mix, &cfg_n));
        for k in 0..len {
            linear.record((cm[k] - a * cx[k] - b * cy[k]).abs(), || {
                format!("trial {trial}")
            });
        }
    }
    checks.push(linear.check("carm_linearity", CARM_TOL));

    Ok(SelfTestReport { checks })
}

fn record_bounds(curve: &FrontierCurve<f64>, label: &str, worst: &mut Worst) {
    let excess = |v: f64| (v.abs() - 1.0).max(0.0);
    for m in curve.magnetizations() {
        worst.record(excess(*m), || label.to_string());
    }
    worst.record(excess(integrated_magnetization(curve)), || {
        label.to_string()
    });
}

/// First-order optimality on the L1 sphere, recomputed from the moment.
///
/// With `g = ∂H/∂σ` and support `S`, a minimizer has `s_i g_i = ν` on `S`
/// and `|g_i| ≤ −ν` off it. Returns the largest violation, scaled by the
/// larger of one and the problem's coefficient magnitude.
pub fn stationarity_violation(state: &GroundState<f64>, moment: &MarketMoment<f64>) -> f64 {
    let lam = state.lambda.value();
    let sigma = state.portfolio.weights();
    let c = moment.covariance();
    let r = moment.mean_returns();
    let grad = c.dot(sigma) * (2.0 * (1.0 - lam)) - r * lam;
    let support: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] != 0.0).collect();
    let oriented: Vec<f64> = support
        .iter()
        .map(|&i| sigma[i].signum() * grad[i])
        .collect();
    let nu = oriented.iter().sum::<f64>() / oriented.len() as f64;
    let mut violation = oriented
        .iter()
        .fold(0.0f64, |acc, g| acc.max((g - nu).abs()));
    for i in (0..sigma.len()).filter(|i| sigma[*i] == 0.0) {
        violation = violation.max(grad[i].abs() + nu);
    }
    let scale = c
        .iter()
        .map(|v| 2.0 * (1.0 - lam) * v.abs())
        .chain(r.iter().map(|v| lam * v.abs()))
        .fold(1.0f64, f64::max);
    violation / scale
}

fn random_sphere_point(rng: &mut impl Rng, n: usize) -> Array1<f64> {
    let raw: Array1<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = raw
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    raw / norm
}
