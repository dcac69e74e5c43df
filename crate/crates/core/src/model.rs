//! Portfolios on the L1 unit sphere and the quantities evaluated on them:
//! return, variance, the λ-weighted Hamiltonian and the magnetization.

use std::cmp::Ordering;

use ndarray::Array1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::MarketMoment;
use crate::scalar::Scalar;

/// Absolute tolerance on `Σ|σ_i| = 1`.
pub const BUDGET_TOLERANCE: f64 = 1e-10;

/// Slack below zero tolerated (and clamped away) in a computed variance.
pub const VARIANCE_CLAMP: f64 = 1e-12;

/// Asset weights with unit L1 norm; negative weights are short positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio<T> {
    weights: Array1<T>,
}

impl<T: Scalar> Portfolio<T> {
    pub fn weights(&self) -> &Array1<T> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn l1_norm(&self) -> T {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Sign-flipped portfolio; still on the sphere.
    pub fn negated(&self) -> Self {
        Self {
            weights: self.weights.mapv(|w| -w),
        }
    }

    /// Wraps weights that are already known to lie on the sphere.
    pub(crate) fn from_normalized(weights: Array1<T>) -> Self {
        debug_assert!(
            (weights.iter().map(|w| w.abs()).sum::<T>() - T::one()).abs()
                <= T::tol(BUDGET_TOLERANCE)
        );
        Self { weights }
    }
}

/// Trade-off parameter between return (λ = 1) and risk (λ = 0).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LambdaValue<T>(T);

impl<T: Scalar> LambdaValue<T> {
    pub fn new(value: T) -> Result<Self> {
        if value >= T::zero() && value <= T::one() {
            Ok(Self(value))
        } else {
            Err(Error::InvalidLambda(value.as_f64()))
        }
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// Accepts `weights` as a portfolio if `|Σ|σ_i| − 1| ≤ 1e-10`.
pub fn validate_budget<T: Scalar>(weights: Array1<T>) -> Result<Portfolio<T>> {
    let l1: T = weights.iter().map(|w| w.abs()).sum();
    let gap = (l1 - T::one()).abs();
    if gap
        .partial_cmp(&T::tol(BUDGET_TOLERANCE))
        .is_none_or(Ordering::is_gt)
    {
        return Err(Error::BudgetViolation {
            l1_norm: l1.as_f64(),
        });
    }
    Ok(Portfolio { weights })
}

fn check_dims<T: Scalar>(p: &Portfolio<T>, m: &MarketMoment<T>) -> Result<()> {
    if p.len() != m.asset_count() {
        return Err(Error::DimensionMismatch {
            expected: m.asset_count(),
            actual: p.len(),
        });
    }
    Ok(())
}

/// `Σ_i R_i σ_i`.
pub fn portfolio_return<T: Scalar>(p: &Portfolio<T>, m: &MarketMoment<T>) -> Result<T> {
    check_dims(p, m)?;
    Ok(p.weights.dot(m.mean_returns()))
}

/// `Σ_ij σ_i C_ij σ_j`, clamped to zero when it is negative by at most 1e-12.
pub fn portfolio_variance<T: Scalar>(p: &Portfolio<T>, m: &MarketMoment<T>) -> Result<T> {
    check_dims(p, m)?;
    let v = p.weights.dot(&m.covariance().dot(&p.weights));
    if v < T::zero() && v >= -T::tol(VARIANCE_CLAMP) {
        Ok(T::zero())
    } else {
        Ok(v)
    }
}

/// `H_λ(σ) = −λ·return + (1 − λ)·variance`.
pub fn hamiltonian<T: Scalar>(
    p: &Portfolio<T>,
    m: &MarketMoment<T>,
    lam: LambdaValue<T>,
) -> Result<T> {
    let ret = portfolio_return(p, m)?;
    let var = portfolio_variance(p, m)?;
    Ok(combine(ret, var, lam))
}

pub(crate) fn combine<T: Scalar>(ret: T, var: T, lam: LambdaValue<T>) -> T {
    let l = lam.value();
    -l * ret + (T::one() - l) * var
}

/// Net exposure `Σ_i σ_i`: +1 fully long, −1 fully short.
///
/// Clamped to `[-1, 1]` so that round-off in the budget never leaks outside
/// the range the triangle inequality guarantees.
pub fn magnetization<T: Scalar>(p: &Portfolio<T>) -> T {
    p.weights.sum().max(-T::one()).min(T::one())
}
