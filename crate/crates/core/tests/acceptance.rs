//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p spinfolio --test acceptance`; append
//! `-- AC-3 AC-9` to run selected criteria only.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinfolio::report::{scan_table, write_curves_csv, write_scan_csv};
use spinfolio::synthetic::{default_start, random_moment, regime_drift, FactorMarket};
use spinfolio::{
    carm, enumerate_exact, grid_oracle, integrated_magnetization, rolling_scan_with,
    solve_ground_state, sweep_frontier_with, CarmConfig, FrontierCurve, GroundState, LambdaGrid,
    LambdaValue, MarketMoment, SolverConfig, Strategy,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: &'static str,
    name: &'static str,
    run: fn() -> Outcome,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: "AC-1",
        name: "heuristic matches exhaustive enumeration",
        run: oracle_equivalence,
    },
    Criterion {
        id: "AC-2",
        name: "exhaustive enumeration agrees with weight grid",
        run: grid_consistency,
    },
    Criterion {
        id: "AC-3",
        name: "closed-form ground state at λ = 1",
        run: lambda_one,
    },
    Criterion {
        id: "AC-4",
        name: "every emitted portfolio on the L1 sphere",
        run: budget_fidelity,
    },
    Criterion {
        id: "AC-5",
        name: "return and variance nondecreasing in λ",
        run: monotone_frontier,
    },
    Criterion {
        id: "AC-6",
        name: "sign-reversal antisymmetry",
        run: antisymmetry,
    },
    Criterion {
        id: "AC-7",
        name: "magnetization bounded by one",
        run: magnetization_bounds,
    },
    Criterion {
        id: "AC-8",
        name: "CARM closed form and linearity",
        run: carm_checks,
    },
    Criterion {
        id: "AC-9",
        name: "bull/bear regime switch recovered",
        run: regime_switch,
    },
    Criterion {
        id: "AC-10",
        name: "paper-scale scan time and determinism",
        run: paper_scale,
    },
];

fn main() -> ExitCode {
    let selected: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let chosen: Vec<&Criterion> = CRITERIA
        .iter()
        .filter(|c| selected.is_empty() || selected.iter().any(|s| s == c.id))
        .collect();
    let mut failed = 0;
    for c in &chosen {
        let start = Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {} [{secs:.1}s]: {detail}", c.id, c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {} [{secs:.1}s]: {detail}", c.id, c.name);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        chosen.len() - failed,
        chosen.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn err(e: spinfolio::Error) -> String {
    e.to_string()
}

fn lam(v: f64) -> LambdaValue<f64> {
    LambdaValue::new(v).expect("λ in [0, 1]")
}

/// Random λ in [0, 1]; the first two draws are the endpoints.
fn draw_lambda(rng: &mut ChaCha8Rng, k: usize) -> f64 {
    match k {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random_range(0.0..=1.0),
    }
}

fn exact_cfg() -> SolverConfig {
    SolverConfig::default()
}

fn oracle_equivalence() -> Outcome {
    const INSTANCES: usize = 210;
    const REL: f64 = 1e-8;
    const FLOOR: f64 = 1e-14;
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..INSTANCES {
        let n = 2 + k % 7;
        let moment = random_moment::<f64>(n, 24, 10_000 + k as u64).map_err(err)?;
        let l = lam(draw_lambda(&mut rng, k));
        let h = solve_ground_state(&moment, l, &cfg).map_err(err)?;
        let e = enumerate_exact(&moment, l, &cfg).map_err(err)?;
        let gap = (h.hamiltonian_value - e.hamiltonian_value).abs();
        let rel = gap / e.hamiltonian_value.abs().max(FLOOR);
        worst = worst.max(rel);
        if rel > REL {
            return Err(format!(
                "instance {k} (N={n}, λ={}): heuristic {} vs exact {}",
                l.value(),
                h.hamiltonian_value,
                e.hamiltonian_value
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        return Err(format!(
            "{INSTANCES} instances took {elapsed:?} (limit 30s)"
        ));
    }
    Ok(format!(
        "{INSTANCES} instances, N 2..8, worst relative gap {worst:e} (limit {REL:e}), {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn grid_consistency() -> Outcome {
    const RESOLUTION: usize = 200;
    const GAP: f64 = 5e-3;
    let cfg = exact_cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut below = 0.0f64;
    let count = 60;
    for k in 0..count {
        let n = 1 + k % 3;
        let moment = random_moment::<f64>(n, 24, 20_000 + k as u64).map_err(err)?;
        let l = lam(draw_lambda(&mut rng, k));
        let e = enumerate_exact(&moment, l, &cfg).map_err(err)?;
        let g = grid_oracle(&moment, l, RESOLUTION).map_err(err)?;
        let gap = g.hamiltonian_value - e.hamiltonian_value;
        worst = worst.max(gap);
        below = below.max(-gap) + 0.0;
        if gap >= GAP {
            return Err(format!("instance {k}: grid exceeds exact by {gap:e}"));
        }
        if -gap > 1e-12 {
            return Err(format!("instance {k}: grid beats exact by {:e}", -gap));
        }
    }
    Ok(format!(
        "{count} instances, N ≤ 3, resolution {RESOLUTION}: worst gap {worst:e} (limit {GAP:e}), exact never beaten by more than {below:e}"
    ))
}

fn lambda_one() -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for k in 0..50 {
        let n = rng.random_range(2..=10);
        let base = random_moment::<f64>(n, 24, 30_000 + k).map_err(err)?;
        let r: Array1<f64> = (0..n).map(|_| rng.random_range(-0.05..0.05)).collect();
        let moment = MarketMoment::new(r.clone(), base.covariance().clone()).map_err(err)?;
        let state = solve_ground_state(&moment, lam(1.0), &cfg).map_err(err)?;
        let kmax = (0..n).fold(0, |b, i| if r[i].abs() > r[b].abs() { i } else { b });
        let mut expected = Array1::zeros(n);
        expected[kmax] = r[kmax].signum();
        if state.portfolio.weights() != expected {
            return Err(format!(
                "vector {k}: got {} expected {}",
                state.portfolio.weights(),
                expected
            ));
        }
    }
    Ok("50 random return vectors, ground state equals sign(R_k) e_k exactly".into())
}

fn collect_budget(states: &[GroundState<f64>], worst: &mut f64, count: &mut usize) {
    for s in states {
        *worst = worst.max((s.portfolio.l1_norm() - 1.0).abs());
        *count += 1;
    }
}

fn budget_fidelity() -> Outcome {
    const LIMIT: f64 = 1e-10;
    let cfg = SolverConfig::default();
    let grid = LambdaGrid::<f64>::uniform(101).map_err(err)?;
    let mut worst = 0.0f64;
    let mut count = 0;
    for (k, &(n, strategy)) in [
        (12usize, Strategy::LocalSearch),
        (20, Strategy::LocalSearch),
        (30, Strategy::LocalSearch),
        (5, Strategy::Exhaustive),
        (8, Strategy::Exhaustive),
    ]
    .iter()
    .enumerate()
    {
        // T = 12 < N for the larger sizes gives singular covariances.
        let moment = random_moment::<f64>(n, 12, 40_000 + k as u64).map_err(err)?;
        let curve = sweep_frontier_with(&moment, &grid, &cfg, strategy).map_err(err)?;
        collect_budget(curve.states(), &mut worst, &mut count);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for k in 0..20 {
        let moment = random_moment::<f64>(1 + k % 4, 24, 41_000 + k as u64).map_err(err)?;
        let l = lam(draw_lambda(&mut rng, k));
        let g = grid_oracle(&moment, l, 60).map_err(err)?;
        collect_budget(&[g], &mut worst, &mut count);
    }
    if worst > LIMIT {
        return Err(format!("|Σ|σ| − 1| reached {worst:e} (limit {LIMIT:e})"));
    }
    Ok(format!(
        "{count} portfolios, worst |Σ|σ| − 1| = {worst:e} (limit {LIMIT:e})"
    ))
}

fn monotone_frontier() -> Outcome {
    const TOL: f64 = 1e-9;
    let cfg = exact_cfg();
    let grid = LambdaGrid::<f64>::uniform(101).map_err(err)?;
    let mut worst = 0.0f64;
    let count = 15;
    for k in 0..count {
        let n = 2 + k % 5;
        let moment = random_moment::<f64>(n, 24, 50_000 + k as u64).map_err(err)?;
        let curve = sweep_frontier_with(&moment, &grid, &cfg, Strategy::Exhaustive).map_err(err)?;
        for (j, pair) in curve.states().windows(2).enumerate() {
            let dr = pair[0].portfolio_return - pair[1].portfolio_return;
            let dv = pair[0].portfolio_variance - pair[1].portfolio_variance;
            worst = worst.max(dr).max(dv);
            if dr > TOL || dv > TOL {
                return Err(format!(
                    "instance {k} (N={n}) between grid points {j} and {}: return drop {dr:e}, variance drop {dv:e}",
                    j + 1
                ));
            }
        }
    }
    Ok(format!(
        "{count} instances, N ≤ 6, exhaustive, 101 λ: worst decrease {worst:e} (limit {TOL:e})"
    ))
}

fn antisymmetry() -> Outcome {
    const TOL: f64 = 1e-8;
    let cfg = exact_cfg();
    let grid = LambdaGrid::<f64>::uniform(101).map_err(err)?;
    let step = 0.01;
    let mut worst_m = 0.0f64;
    let mut worst_event = 0.0f64;
    let count = 15;
    for k in 0..count {
        let n = 2 + k % 5;
        let moment = random_moment::<f64>(n, 24, 60_000 + k as u64).map_err(err)?;
        let a = sweep_frontier_with(&moment, &grid, &cfg, Strategy::Exhaustive).map_err(err)?;
        let b = sweep_frontier_with(&moment.mirrored(), &grid, &cfg, Strategy::Exhaustive)
            .map_err(err)?;
        for (x, y) in a.magnetizations().iter().zip(b.magnetizations()) {
            worst_m = worst_m.max((x + y).abs());
        }
        worst_m = worst_m.max((integrated_magnetization(&a) + integrated_magnetization(&b)).abs());
        let (ea, eb) = (a.events(), b.events());
        worst_event = worst_event
            .max((ea.zero_event - eb.zero_event).abs())
            .max((ea.max_event - eb.max_event).abs());
        if worst_m > TOL || worst_event > step + 1e-12 {
            return Err(format!(
                "instance {k} (N={n}): magnetization mismatch {worst_m:e}, event shift {worst_event}"
            ));
        }
    }
    Ok(format!(
        "{count} instances, N ≤ 6: worst |m + m'| = {worst_m:e} (limit {TOL:e}), worst event shift {worst_event} (limit one step, {step})"
    ))
}

fn magnetization_bounds() -> Outcome {
    let cfg = SolverConfig::default();
    let grid = LambdaGrid::<f64>::uniform(101).map_err(err)?;
    let count = 1000;
    let mut extreme = 0.0f64;
    for k in 0..count {
        let n = 2 + k % 9;
        let moment = random_moment::<f64>(n, 24, 70_000 + k as u64).map_err(err)?;
        let curve: FrontierCurve<f64> =
            sweep_frontier_with(&moment, &grid, &cfg, Strategy::LocalSearch).map_err(err)?;
        let m_int = integrated_magnetization(&curve);
        for &m in curve.magnetizations().iter().chain(std::iter::once(&m_int)) {
            extreme = extreme.max(m.abs());
            if !(-1.0..=1.0).contains(&m) {
                return Err(format!("instance {k} (N={n}): value {m} outside [−1, 1]"));
            }
        }
    }
    Ok(format!(
        "{count} instances × 101 λ, largest |m| or |M| = {extreme}"
    ))
}

fn carm_checks() -> Outcome {
    const TOL: f64 = 1e-12;
    for n in [1usize, 2, 5, 12] {
        let harmonic: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
        let expected = 1.0 + harmonic / n as f64;
        let cfg = CarmConfig {
            horizon_n: n,
            normalize_by_median: false,
        };
        let out = carm(&vec![1.0f64; 4 * n + 4], &cfg);
        let got = out[out.len() - 1];
        if (got - expected).abs() > TOL {
            return Err(format!("N={n}: CARM of ones is {got}, expected {expected}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let len = rng.random_range(1..60);
        let n = rng.random_range(1..=24);
        let cfg = CarmConfig {
            horizon_n: n,
            normalize_by_median: false,
        };
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let (cx, cy, cm) = (carm(&x, &cfg), carm(&y, &cfg), carm(&mix, &cfg));
        for t in 0..len {
            worst = worst.max((cm[t] - (a * cx[t] + b * cy[t])).abs());
        }
    }
    if worst > TOL {
        return Err(format!("linearity error {worst:e} (limit {TOL:e})"));
    }
    Ok(format!(
        "constant series exact for N ∈ {{1, 2, 5, 12}}; 200 linearity trials, worst {worst:e} (limit {TOL:e})"
    ))
}

fn regime_switch() -> Outcome {
    const WINDOW: usize = 12;
    // Volatilities low enough that every 12-month sample mean keeps the
    // sign of its regime's drift.
    let market = FactorMarket {
        assets: 6,
        factor_vol: 0.02,
        idiosyncratic_vol: 0.02,
        seed: 909,
    };
    let panel = market
        .return_panel::<f64>(default_start(), &regime_drift(60, 60, 0.02))
        .map_err(err)?;
    let grid = LambdaGrid::<f64>::uniform(101).map_err(err)?;
    let series = rolling_scan_with(&panel, WINDOW, &grid, &exact_cfg(), Strategy::Exhaustive)
        .map_err(err)?;
    let m = series.integrated_m();
    // Point k covers return rows k ..= k + 11; rows 0..59 are bullish.
    let end = |k: usize| k + WINDOW - 1;
    let bull: Vec<usize> = (0..m.len()).filter(|&k| end(k) <= 59).collect();
    let bear: Vec<usize> = (0..m.len()).filter(|&k| end(k) >= 71).collect();
    if let Some(&k) = bull.iter().find(|&&k| m[k] <= 0.0) {
        return Err(format!(
            "bull window ending at row {} has M = {}",
            end(k),
            m[k]
        ));
    }
    if let Some(&k) = bear.iter().find(|&&k| m[k] >= 0.0) {
        return Err(format!(
            "bear window ending at row {} has M = {}",
            end(k),
            m[k]
        ));
    }
    let band: Vec<usize> = (0..m.len())
        .filter(|&k| (59..=71).contains(&end(k)))
        .collect();
    let crossing = band
        .windows(2)
        .find(|w| m[w[0]] > 0.0 && m[w[1]] <= 0.0)
        .map(|w| end(w[1]))
        .ok_or_else(|| "M does not cross zero inside the transition band".to_string())?;
    let min_bull = bull.iter().map(|&k| m[k]).fold(f64::INFINITY, f64::min);
    let max_bear = bear.iter().map(|&k| m[k]).fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "{} windows; min M over bull windows {min_bull:.4}, max M over bear windows {max_bear:.4}, sign change at window ending row {crossing}",
        m.len()
    ))
}

fn paper_scale() -> Outcome {
    const LIMIT: Duration = Duration::from_secs(120);
    let market = FactorMarket::new(30, 1010);
    let drift: Vec<f64> = (0..180).map(|t| 0.01 * (t as f64 / 30.0).sin()).collect();
    let panel = market
        .return_panel::<f64>(default_start(), &drift)
        .map_err(err)?;
    let grid = LambdaGrid::<f64>::uniform(101).map_err(err)?;
    let cfg = SolverConfig::default();
    let render = || -> Result<Vec<u8>, String> {
        let series =
            rolling_scan_with(&panel, 12, &grid, &cfg, Strategy::LocalSearch).map_err(err)?;
        let mut out = Vec::new();
        write_scan_csv(&mut out, &scan_table(&series, &CarmConfig::default()))
            .map_err(|e| e.to_string())?;
        write_curves_csv(&mut out, &grid, &series).map_err(|e| e.to_string())?;
        Ok(out)
    };
    let start = Instant::now();
    let first = render()?;
    let elapsed = start.elapsed();
    if elapsed > LIMIT {
        return Err(format!("scan took {elapsed:?} (limit {LIMIT:?})"));
    }
    let second = render()?;
    if first != second {
        return Err("two runs with the same seed produced different output".into());
    }
    Ok(format!(
        "30 assets, 180 months, window 12, 101 λ: {:.1}s (limit {}s); repeat run byte-identical ({} bytes)",
        elapsed.as_secs_f64(),
        LIMIT.as_secs(),
        first.len()
    ))
}
