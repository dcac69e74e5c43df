//! Ground states of the mean-variance Hamiltonian on the L1 unit sphere.
//!
//! Fixing the sign of every weight restricts the sphere to one orthant, where
//! `x_i = s_i σ_i` ranges over the probability simplex and the Hamiltonian is
//! a convex quadratic. [`solve_orthant`] solves that convex piece exactly;
//! [`solve_ground_state`] searches over sign patterns by single-asset flips,
//! while [`enumerate_exact`] and [`grid_oracle`] are brute-force references.

mod oracle;
mod simplex;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::MarketMoment;
use crate::model::{self, LambdaValue, Portfolio};
use crate::scalar::Scalar;

pub use oracle::{enumerate_exact, grid_oracle, GRID_ORACLE_ASSET_LIMIT};

/// Minimum Hamiltonian decrease for a sign flip to be accepted; also the
/// width within which two candidates count as tied.
pub const STRICT_DECREASE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor<T: Scalar>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// One sign per asset, selecting an orthant of weight space. The derived
/// ordering is lexicographic with `+` before `−`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern(Vec<Sign>);

impl SignPattern {
    pub fn new(signs: Vec<Sign>) -> Self {
        Self(signs)
    }

    pub fn all_plus(n: usize) -> Self {
        Self(vec![Sign::Plus; n])
    }

    pub fn all_minus(n: usize) -> Self {
        Self(vec![Sign::Minus; n])
    }

    /// Sign of each value, zero mapped to `+`.
    pub fn of<T: Scalar>(values: &[T]) -> Self {
        Self(
            values
                .iter()
                .map(|v| {
                    if *v < T::zero() {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    }
                })
                .collect(),
        )
    }

    /// Pattern number `index` in lexicographic order (bit `n−1−i` set means
    /// asset `i` is short).
    pub(crate) fn from_index(index: u64, n: usize) -> Self {
        Self(
            (0..n)
                .map(|i| {
                    if index >> (n - 1 - i) & 1 == 1 {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    }
                })
                .collect(),
        )
    }

    fn random(rng: &mut impl Rng, n: usize) -> Self {
        Self(
            (0..n)
                .map(|_| {
                    if rng.random::<bool>() {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }
                })
                .collect(),
        )
    }

    pub fn with_flip(&self, index: usize) -> Self {
        let mut signs = self.0.clone();
        signs[index] = signs[index].flipped();
        Self(signs)
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                Sign::Plus => "+",
                Sign::Minus => "-",
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub random_restarts: usize,
    pub rng_seed: u64,
    /// KKT residual accepted from the per-orthant QP (scaled by the problem's
    /// largest coefficient when that exceeds one).
    pub kkt_tolerance: f64,
    /// Accepted flips per seed before the local search stops.
    pub max_sign_flips: usize,
    pub oracle_asset_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            random_restarts: 8,
            rng_seed: 0,
            kkt_tolerance: 1e-9,
            max_sign_flips: 200,
            oracle_asset_limit: 12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kkt_tolerance > 0.0 && self.kkt_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "kkt_tolerance must be positive, got {}",
                self.kkt_tolerance
            )));
        }
        if self.oracle_asset_limit > 62 {
            return Err(Error::InvalidConfig(format!(
                "oracle_asset_limit {} is too large to enumerate",
                self.oracle_asset_limit
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Heuristic,
    OrthantExact,
    GridOracle,
}

/// How ground states are searched for along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Sign-flip local search from several seeds.
    #[default]
    LocalSearch,
    /// All `2^N` orthants; bounded by `oracle_asset_limit`.
    Exhaustive,
}

/// Minimum-Hamiltonian portfolio found for one λ.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState<T> {
    pub portfolio: Portfolio<T>,
    pub hamiltonian_value: T,
    pub lambda: LambdaValue<T>,
    pub method: Method,
    pub portfolio_return: T,
    pub portfolio_variance: T,
    /// KKT residual certified by the orthant QP; `None` for the grid oracle.
    pub kkt_residual: Option<T>,
}

impl<T: Scalar> GroundState<T> {
    pub(crate) fn evaluate(
        portfolio: Portfolio<T>,
        moment: &MarketMoment<T>,
        lambda: LambdaValue<T>,
        method: Method,
    ) -> Result<Self> {
        let portfolio_return = model::portfolio_return(&portfolio, moment)?;
        let portfolio_variance = model::portfolio_variance(&portfolio, moment)?;
        Ok(Self {
            hamiltonian_value: model::combine(portfolio_return, portfolio_variance, lambda),
            portfolio,
            lambda,
            method,
            portfolio_return,
            portfolio_variance,
            kkt_residual: None,
        })
    }

    pub fn magnetization(&self) -> T {
        model::magnetization(&self.portfolio)
    }

    /// Sign of each weight, zero weights counted as `+`.
    pub fn sign_pattern(&self) -> SignPattern {
        SignPattern::of(self.portfolio.weights().as_slice().unwrap_or(&[]))
    }

    /// Tie-break order: lower Hamiltonian, then higher return, then the
    /// lexicographically earliest sign pattern (`+` first), then the larger
    /// weight at the first differing asset. `Less` means `self` is preferred.
    pub fn preference(&self, other: &Self) -> Ordering {
        let tie = T::tol(STRICT_DECREASE);
        let close = |a: T, b: T| (a - b).abs() <= tie;
        if !close(self.hamiltonian_value, other.hamiltonian_value) {
            return cmp(self.hamiltonian_value, other.hamiltonian_value);
        }
        if !close(self.portfolio_return, other.portfolio_return) {
            return cmp(other.portfolio_return, self.portfolio_return);
        }
        self.sign_pattern()
            .cmp(&other.sign_pattern())
            .then_with(|| {
                self.portfolio
                    .weights()
                    .iter()
                    .zip(other.portfolio.weights())
                    .find(|(a, b)| !close(**a, **b))
                    .map_or(Ordering::Equal, |(a, b)| cmp(*b, *a))
            })
    }
}

fn cmp<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

pub(crate) fn keep_preferred<T: Scalar>(
    best: &mut Option<GroundState<T>>,
    candidate: GroundState<T>,
) {
    match best {
        Some(b) if b.preference(&candidate) != Ordering::Greater => {}
        _ => *best = Some(candidate),
    }
}

/// Convex per-orthant problem in simplex coordinates `x = s ∘ σ`:
/// `½ xᵀ G x + gᵀ x` with `G = 2(1−λ) S C S`, `g = −λ S R`.
struct OrthantProblem<T> {
    hess: Array2<T>,
    lin: Vec<T>,
}

impl<T: Scalar> OrthantProblem<T> {
    fn new(pattern: &SignPattern, moment: &MarketMoment<T>, lam: LambdaValue<T>) -> Self {
        let l = lam.value();
        let curvature = T::lit(2.0) * (T::one() - l);
        let s: Vec<T> = pattern.signs().iter().map(|x| x.factor()).collect();
        let c = moment.covariance();
        let n = s.len();
        let mut hess = Vec::with_capacity(n * n);
        for (i, row) in c.rows().into_iter().enumerate() {
            let scale = curvature * s[i];
            hess.extend(row.iter().zip(&s).map(|(cij, sj)| scale * *sj * *cij));
        }
        let hess = Array2::from_shape_vec((n, n), hess).expect("n × n covariance");
        let lin = moment
            .mean_returns()
            .iter()
            .zip(&s)
            .map(|(r, si)| -l * *si * *r)
            .collect();
        Self { hess, lin }
    }
}

/// Orthant optimum plus what the local search needs to screen flips.
struct OrthantSolution<T> {
    pattern: SignPattern,
    x: Vec<T>,
    gradient: Vec<T>,
    multiplier: T,
    state: GroundState<T>,
}

fn solve_orthant_inner<T: Scalar>(
    pattern: &SignPattern,
    moment: &MarketMoment<T>,
    lam: LambdaValue<T>,
    tolerance: T,
    start: Option<&[T]>,
    method: Method,
) -> Result<OrthantSolution<T>> {
    let problem = OrthantProblem::new(pattern, moment, lam);
    let sol = simplex::minimize(&problem.hess, &problem.lin, start, tolerance)?;
    let weights: Array1<T> = sol
        .x
        .iter()
        .zip(pattern.signs())
        .map(|(x, s)| *x * s.factor::<T>())
        .collect();
    let mut state =
        GroundState::evaluate(Portfolio::from_normalized(weights), moment, lam, method)?;
    state.kkt_residual = Some(sol.residual);
    Ok(OrthantSolution {
        pattern: pattern.clone(),
        x: sol.x,
        gradient: sol.gradient,
        multiplier: sol.multiplier,
        state,
    })
}

fn check_pattern<T: Scalar>(pattern: &SignPattern, moment: &MarketMoment<T>) -> Result<()> {
    if pattern.len() != moment.asset_count() {
        return Err(Error::DimensionMismatch {
            expected: moment.asset_count(),
            actual: pattern.len(),
        });
    }
    Ok(())
}

/// Exact minimizer of the Hamiltonian over the orthant selected by `pattern`.
pub fn solve_orthant<T: Scalar>(
    pattern: &SignPattern,
    moment: &MarketMoment<T>,
    lam: LambdaValue<T>,
    cfg: &SolverConfig,
) -> Result<GroundState<T>> {
    cfg.validate()?;
    check_pattern(pattern, moment)?;
    moment.ensure_psd()?;
    let tol = T::tol(cfg.kkt_tolerance);
    solve_orthant_inner(pattern, moment, lam, tol, None, Method::OrthantExact).map(|s| s.state)
}

/// Best ground state reachable by single-flip local search from the standard
/// seeds: `sign(R)`, all-plus, all-minus and `random_restarts` random patterns.
pub fn solve_ground_state<T: Scalar>(
    moment: &MarketMoment<T>,
    lam: LambdaValue<T>,
    cfg: &SolverConfig,
) -> Result<GroundState<T>> {
    solve_ground_state_seeded(moment, lam, cfg, &[])
}

/// [`solve_ground_state`] with additional seed patterns, e.g. the ground
/// state's pattern at a neighbouring λ.
pub fn solve_ground_state_seeded<T: Scalar>(
    moment: &MarketMoment<T>,
    lam: LambdaValue<T>,
    cfg: &SolverConfig,
    extra_seeds: &[SignPattern],
) -> Result<GroundState<T>> {
    cfg.validate()?;
    moment.ensure_psd()?;
    let n = moment.asset_count();
    for seed in extra_seeds {
        check_pattern(seed, moment)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut seeds = vec![
        SignPattern::of(moment.mean_returns().as_slice().unwrap_or(&[])),
        SignPattern::all_plus(n),
        SignPattern::all_minus(n),
    ];
    seeds.extend((0..cfg.random_restarts).map(|_| SignPattern::random(&mut rng, n)));
    seeds.extend(extra_seeds.iter().cloned());

    let mut search = LocalSearch {
        moment,
        lam,
        tolerance: T::tol(cfg.kkt_tolerance),
        max_flips: cfg.max_sign_flips,
        cache: HashMap::new(),
    };
    let mut best: Option<GroundState<T>> = None;
    let mut tried = Vec::with_capacity(seeds.len());
    for seed in seeds {
        if tried.contains(&seed) {
            continue;
        }
        let found = search.descend(&seed)?;
        keep_preferred(&mut best, found);
        tried.push(seed);
    }
    let mut state = best.expect("at least one seed");
    state.method = Method::Heuristic;
    Ok(state)
}

struct LocalSearch<'a, T> {
    moment: &'a MarketMoment<T>,
    lam: LambdaValue<T>,
    tolerance: T,
    max_flips: usize,
    cache: HashMap<SignPattern, std::rc::Rc<OrthantSolution<T>>>,
}

impl<T: Scalar> LocalSearch<'_, T> {
    fn solve(
        &mut self,
        pattern: &SignPattern,
        start: Option<&[T]>,
    ) -> Result<std::rc::Rc<OrthantSolution<T>>> {
        if let Some(hit) = self.cache.get(pattern) {
            return Ok(hit.clone());
        }
        let sol = std::rc::Rc::new(solve_orthant_inner(
            pattern,
            self.moment,
            self.lam,
            self.tolerance,
            start,
            Method::OrthantExact,
        )?);
        self.cache.insert(pattern.clone(), sol.clone());
        Ok(sol)
    }

    /// First-improvement descent over single sign flips. Zero-weight assets
    /// are tried first; flipping one cannot help unless the reduced cost in
    /// the flipped orthant, `−∂_i − μ`, is negative, since otherwise the
    /// current point is already KKT (hence optimal) there too.
    fn descend(&mut self, seed: &SignPattern) -> Result<GroundState<T>> {
        let decrease = T::tol(STRICT_DECREASE);
        let mut current = self.solve(seed, None)?;
        let mut flips = 0;
        'search: while flips < self.max_flips {
            let n = current.x.len();
            let zeros = (0..n).filter(|&i| current.x[i] == T::zero());
            let held = (0..n).filter(|&i| current.x[i] != T::zero());
            for i in zeros.chain(held) {
                let flipped = current.pattern.with_flip(i);
                let start = if current.x[i] == T::zero() {
                    let reduced = -current.gradient[i] - current.multiplier;
                    if reduced >= -self.tolerance {
                        continue;
                    }
                    Some(current.x.clone())
                } else if current.x[i] < T::one() {
                    let mut x = current.x.clone();
                    x[i] = T::zero();
                    Some(x)
                } else {
                    None
                };
                let candidate = self.solve(&flipped, start.as_deref())?;
                if candidate.state.hamiltonian_value < current.state.hamiltonian_value - decrease {
                    current = candidate;
                    flips += 1;
                    continue 'search;
                }
            }
            break;
        }
        Ok(current.state.clone())
    }
}

impl<T: Scalar> MarketMoment<T> {
    /// Verifies semidefiniteness unless the moment was built by a checking
    /// constructor.
    pub(crate) fn ensure_psd(&self) -> Result<()> {
        if self.is_verified() {
            Ok(())
        } else {
            self.check_psd()
        }
    }
}
