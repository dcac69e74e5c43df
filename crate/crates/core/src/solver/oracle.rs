//! Brute-force references for the ground state.

use ndarray::Array1;

use super::{
    check_pattern, keep_preferred, solve_orthant_inner, GroundState, Method, SignPattern,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::ingest::MarketMoment;
use crate::model::{self, LambdaValue};
use crate::scalar::Scalar;

pub const GRID_ORACLE_ASSET_LIMIT: usize = 4;

/// Global ground state by solving every one of the `2^N` orthants.
pub fn enumerate_exact<T: Scalar>(
    moment: &MarketMoment<T>,
    lam: LambdaValue<T>,
    cfg: &SolverConfig,
) -> Result<GroundState<T>> {
    cfg.validate()?;
    let n = moment.asset_count();
    if n > cfg.oracle_asset_limit {
        return Err(Error::AssetLimitExceeded {
            assets: n,
            limit: cfg.oracle_asset_limit,
        });
    }
    moment.ensure_psd()?;
    let tol = T::tol(cfg.kkt_tolerance);
    let mut best = None;
    for index in 0..(1u64 << n) {
        let pattern = SignPattern::from_index(index, n);
        check_pattern(&pattern, moment)?;
        let sol = solve_orthant_inner(&pattern, moment, lam, tol, None, Method::OrthantExact)?;
        keep_preferred(&mut best, sol.state);
    }
    Ok(best.expect("2^N ≥ 1 orthants"))
}

/// Exhaustive search over weights `±k_i / resolution` with `Σ k_i = resolution`.
///
/// Accuracy is `O(1/resolution)`; it shares nothing with the QP path beyond
/// the Hamiltonian definition.
pub fn grid_oracle<T: Scalar>(
    moment: &MarketMoment<T>,
    lam: LambdaValue<T>,
    resolution: usize,
) -> Result<GroundState<T>> {
    let n = moment.asset_count();
    if n > GRID_ORACLE_ASSET_LIMIT {
        return Err(Error::AssetLimitExceeded {
            assets: n,
            limit: GRID_ORACLE_ASSET_LIMIT,
        });
    }
    if resolution == 0 {
        return Err(Error::InvalidConfig(
            "grid resolution must be positive".into(),
        ));
    }
    let r = moment.mean_returns();
    let c = moment.covariance();
    let step = T::one() / T::from_count(resolution);
    let tie = T::tol(super::STRICT_DECREASE);

    let mut counts = vec![0usize; n];
    let mut weights = vec![T::zero(); n];
    let mut best: Option<(T, T, Vec<T>)> = None;
    compositions(&mut counts, 0, resolution, &mut |counts| {
        let nonzero: Vec<usize> = (0..n).filter(|&i| counts[i] > 0).collect();
        for mask in 0..(1u32 << nonzero.len()) {
            for i in 0..n {
                weights[i] = T::from_count(counts[i]) * step;
            }
            for (bit, &i) in nonzero.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    weights[i] = -weights[i];
                }
            }
            let mut ret = T::zero();
            let mut var = T::zero();
            for i in 0..n {
                ret = ret + r[i] * weights[i];
                for j in 0..n {
                    var = var + weights[i] * c[[i, j]] * weights[j];
                }
            }
            let h = -lam.value() * ret + (T::one() - lam.value()) * var;
            let better = match &best {
                None => true,
                Some((bh, bret, bw)) => {
                    if (h - *bh).abs() > tie {
                        h < *bh
                    } else if (ret - *bret).abs() > tie {
                        ret > *bret
                    } else {
                        let pattern = SignPattern::of(&weights);
                        let best_pattern = SignPattern::of(bw);
                        pattern < best_pattern
                            || (pattern == best_pattern
                                && weights
                                    .iter()
                                    .zip(bw)
                                    .find(|(a, b)| (**a - **b).abs() > tie)
                                    .is_some_and(|(a, b)| a > b))
                    }
                }
            };
            if better {
                best = Some((h, ret, weights.clone()));
            }
        }
    });

    let (_, _, w) = best.expect("at least one composition");
    let portfolio = model::validate_budget(Array1::from(w))?;
    GroundState::evaluate(portfolio, moment, lam, Method::GridOracle)
}

fn compositions(
    counts: &mut [usize],
    at: usize,
    remaining: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if at + 1 == counts.len() {
        counts[at] = remaining;
        visit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[at] = k;
        compositions(counts, at + 1, remaining - k, visit);
    }
}
