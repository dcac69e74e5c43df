//! Primal active-set method for
//!
//! ```text
//!     minimize   ½ xᵀ G x + gᵀ x
//!     subject to x ≥ 0,  Σ x = 1
//! ```
//!
//! with `G` symmetric positive semidefinite, possibly singular. On each face
//! the step is computed from the eigen-decomposition of the Hessian projected
//! onto `{Σ p = 0}`: a Newton step on its range, or a descent ray along its
//! null space (which always ends on a bound because the simplex is compact).

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::jacobi;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct SimplexSolution<T> {
    pub x: Vec<T>,
    /// Objective gradient `G x + g` at `x`.
    pub gradient: Vec<T>,
    /// Multiplier of the `Σ x = 1` constraint (common gradient on the support).
    pub multiplier: T,
    /// Largest KKT violation: face stationarity or negative reduced cost.
    pub residual: T,
}

pub(crate) fn minimize<T: Scalar>(
    hess: &Array2<T>,
    lin: &[T],
    start: Option<&[T]>,
    tolerance: T,
) -> Result<SimplexSolution<T>> {
    let n = lin.len();
    debug_assert_eq!(hess.dim(), (n, n));
    if n == 0 {
        return Err(Error::InvalidConfig("empty simplex problem".into()));
    }

    let hess_scale = hess.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let lin_scale = lin.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tol = tolerance * T::one().max(hess_scale).max(lin_scale);
    let limits = Limits {
        flat: T::tol(1e-11) * hess_scale,
        pivot: T::tol(1e-8) * hess_scale,
        indefinite: T::tol(1e-8) * T::from_count(n) * hess_scale,
    };

    let mut x = vec![T::zero(); n];
    let mut free: Vec<usize> = Vec::with_capacity(n);
    match start.filter(|s| s.len() == n) {
        Some(s) if s.iter().all(|v| v.is_finite()) && s.iter().any(|v| *v > T::zero()) => {
            let total: T = s.iter().filter(|v| **v > T::zero()).copied().sum();
            for (i, v) in s.iter().enumerate() {
                if *v > T::zero() {
                    x[i] = *v / total;
                    free.push(i);
                }
            }
        }
        _ => {
            let half = T::lit(0.5);
            let best = (0..n)
                .min_by(|&a, &b| {
                    let fa = half * hess[[a, a]] + lin[a];
                    let fb = half * hess[[b, b]] + lin[b];
                    fa.partial_cmp(&fb).unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(0);
            x[best] = T::one();
            free.push(best);
        }
    }

    let max_iterations = 50 * n + 50;
    let mut grad = vec![T::zero(); n];
    let mut last_residual = T::infinity();
    for _ in 0..max_iterations {
        for (i, gi) in grad.iter_mut().enumerate() {
            *gi = lin[i] + free.iter().map(|&j| hess[[i, j]] * x[j]).sum::<T>();
        }
        let k = free.len();
        let mean = free.iter().map(|&i| grad[i]).sum::<T>() / T::from_count(k);
        let reduced: Vec<T> = free.iter().map(|&i| grad[i] - mean).collect();
        let face_residual = reduced.iter().fold(T::zero(), |acc, r| acc.max(r.abs()));
        last_residual = face_residual;

        if k >= 2 && face_residual > tol {
            let step = face_direction(hess, &free, &reduced, &limits, tol)?;
            let (dir, alpha_max) = match step {
                FaceStep::Newton(d) => (d, T::one()),
                FaceStep::Ray(d) => (d, T::infinity()),
            };
            let mut alpha = alpha_max;
            let mut blocking = None;
            for (a, &i) in free.iter().enumerate() {
                if dir[a] < T::zero() {
                    let ratio = x[i] / -dir[a];
                    if ratio < alpha {
                        alpha = ratio;
                        blocking = Some(a);
                    }
                }
            }
            if !alpha.is_finite() {
                return Err(Error::NotConverged {
                    iterations: max_iterations,
                    residual: face_residual.as_f64(),
                });
            }
            for (a, &i) in free.iter().enumerate() {
                x[i] = x[i] + alpha * dir[a];
            }
            if let Some(a) = blocking {
                x[free[a]] = T::zero();
                free.remove(a);
            }
            // Round-off can push another coordinate marginally below zero.
            free.retain(|&i| {
                if x[i] <= T::zero() {
                    x[i] = T::zero();
                    false
                } else {
                    true
                }
            });
            if free.is_empty() {
                return Err(Error::NotConverged {
                    iterations: max_iterations,
                    residual: face_residual.as_f64(),
                });
            }
            continue;
        }

        // Face is stationary: price the bounds.
        let entering = (0..n)
            .filter(|i| free.binary_search(i).is_err())
            .map(|i| (i, grad[i] - mean))
            .fold(None::<(usize, T)>, |best, (i, c)| match best {
                Some((_, bc)) if bc <= c => best,
                _ => Some((i, c)),
            });
        match entering {
            Some((j, c)) if c < -tol => {
                let at = free.binary_search(&j).unwrap_err();
                free.insert(at, j);
            }
            other => {
                let dual = other.map_or(T::zero(), |(_, c)| (-c).max(T::zero()));
                let total: T = x.iter().copied().sum();
                for v in x.iter_mut() {
                    *v = *v / total;
                }
                return Ok(SimplexSolution {
                    x,
                    gradient: grad,
                    multiplier: mean,
                    residual: face_residual.max(dual),
                });
            }
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        residual: last_residual.as_f64(),
    })
}

/// Curvature thresholds, relative to the largest Hessian entry.
struct Limits<T> {
    /// Eigenvalues at or below this count as flat directions.
    flat: T,
    /// Smallest Cholesky pivot accepted on the fast path.
    pivot: T,
    /// Eigenvalues below minus this reject the Hessian as indefinite.
    indefinite: T,
}

enum FaceStep<T> {
    /// Minimizer of the face quadratic along the curved directions; step ≤ 1.
    Newton(Vec<T>),
    /// Zero-curvature descent direction; the step is limited only by bounds.
    Ray(Vec<T>),
}

fn face_direction<T: Scalar>(
    hess: &Array2<T>,
    free: &[usize],
    reduced: &[T],
    limits: &Limits<T>,
    tol: T,
) -> Result<FaceStep<T>> {
    if let Some(step) = cholesky_newton(hess, free, reduced, limits.pivot) {
        return Ok(FaceStep::Newton(step));
    }
    let k = free.len();
    let kt = T::from_count(k);
    let row_mean: Vec<T> = free
        .iter()
        .map(|&i| free.iter().map(|&j| hess[[i, j]]).sum::<T>() / kt)
        .collect();
    let total_mean = row_mean.iter().copied().sum::<T>() / kt;
    let mut projected = vec![T::zero(); k * k];
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            projected[a * k + b] = hess[[i, j]] - row_mean[a] - row_mean[b] + total_mean;
        }
    }

    let (values, vectors) = jacobi(&mut projected, k);
    let mut newton = vec![T::zero(); k];
    let mut null_part = reduced.to_vec();
    for (idx, &value) in values.iter().enumerate() {
        if value < -limits.indefinite {
            return Err(Error::NotPositiveSemidefinite {
                eigenvalue: value.as_f64(),
                largest: values.iter().fold(T::zero(), |a, v| a.max(*v)).as_f64(),
            });
        }
        if value <= limits.flat {
            continue;
        }
        let coeff: T = (0..k).map(|a| vectors[a * k + idx] * reduced[a]).sum();
        for a in 0..k {
            let va = vectors[a * k + idx];
            newton[a] = newton[a] - coeff / value * va;
            null_part[a] = null_part[a] - coeff * va;
        }
    }
    center(&mut null_part);
    let null_norm = null_part.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if null_norm > tol {
        Ok(FaceStep::Ray(null_part.into_iter().map(|v| -v).collect()))
    } else {
        center(&mut newton);
        Ok(FaceStep::Newton(newton))
    }
}

/// Newton step on the face via Cholesky of the Hessian in the basis
/// `e_a − e_last`. Returns `None` unless every pivot clears `floor`, leaving
/// singular and indefinite faces to the eigen path.
fn cholesky_newton<T: Scalar>(
    hess: &Array2<T>,
    free: &[usize],
    reduced: &[T],
    floor: T,
) -> Option<Vec<T>> {
    let m = free.len() - 1;
    let last = free[m];
    let mut l = vec![T::zero(); m * m];
    for a in 0..m {
        let i = free[a];
        for b in 0..=a {
            let j = free[b];
            l[a * m + b] = hess[[i, j]] - hess[[i, last]] - hess[[last, j]] + hess[[last, last]];
        }
    }
    for j in 0..m {
        let mut d = l[j * m + j];
        for p in 0..j {
            d = d - l[j * m + p] * l[j * m + p];
        }
        if d <= floor {
            return None;
        }
        let d = d.sqrt();
        l[j * m + j] = d;
        for i in (j + 1)..m {
            let mut s = l[i * m + j];
            for p in 0..j {
                s = s - l[i * m + p] * l[j * m + p];
            }
            l[i * m + j] = s / d;
        }
    }
    let mut y: Vec<T> = (0..m).map(|a| reduced[m] - reduced[a]).collect();
    for i in 0..m {
        for p in 0..i {
            y[i] = y[i] - l[i * m + p] * y[p];
        }
        y[i] = y[i] / l[i * m + i];
    }
    for i in (0..m).rev() {
        for p in (i + 1)..m {
            y[i] = y[i] - l[p * m + i] * y[p];
        }
        y[i] = y[i] / l[i * m + i];
    }
    let tail = -y.iter().copied().sum::<T>();
    y.push(tail);
    Some(y)
}

fn center<T: Scalar>(v: &mut [T]) {
    let mean = v.iter().copied().sum::<T>() / T::from_count(v.len());
    for x in v.iter_mut() {
        *x = *x - mean;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn objective(g: &Array2<f64>, c: &[f64], x: &[f64]) -> f64 {
        let n = x.len();
        let mut v = 0.0;
        for i in 0..n {
            v += c[i] * x[i];
            for j in 0..n {
                v += 0.5 * x[i] * g[[i, j]] * x[j];
            }
        }
        v
    }

    #[test]
    fn diagonal_quadratic() {
        let g = array![[2.0f64, 0.0], [0.0, 8.0]];
        let sol = minimize(&g, &[0.0, 0.0], None, 1e-12).unwrap();
        assert!((sol.x[0] - 0.8).abs() < 1e-14 && (sol.x[1] - 0.2).abs() < 1e-14);
        assert!(sol.residual <= 1e-12);
    }

    #[test]
    fn linear_objective_picks_vertex() {
        let g = Array2::zeros((3, 3));
        let sol = minimize(&g, &[-0.02, -0.05, 0.01], None, 1e-12).unwrap();
        assert_eq!(sol.x, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn singular_hessian_follows_flat_ray() {
        // Rank-one Hessian: assets 0 and 1 are identical, asset 2 is riskless
        // but earns less. The flat direction (x0 - x1) is irrelevant; the
        // minimizer puts weight on asset 2 only when it pays.
        let g = array![[2.0, 2.0, 0.0], [2.0, 2.0, 0.0], [0.0, 0.0, 0.0]];
        let sol = minimize(&g, &[-0.1, -0.1, 0.0], None, 1e-12).unwrap();
        let f = objective(&g, &[-0.1, -0.1, 0.0], &sol.x);
        // On the simplex x0 + x1 = s, f = s² − 0.1 s, minimized at s = 0.05.
        assert!((f + 0.0025).abs() < 1e-14, "{f}");
        assert!((sol.x[2] - 0.95).abs() < 1e-12);
    }

    #[test]
    fn warm_start_reaches_same_optimum() {
        let g = array![[4.0f64, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let c = [-0.3, 0.1, -0.2];
        let cold = minimize(&g, &c, None, 1e-13).unwrap();
        let warm = minimize(&g, &c, Some(&[0.1, 0.8, 0.1]), 1e-13).unwrap();
        for (a, b) in cold.x.iter().zip(&warm.x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_hessian_is_rejected() {
        // Concave along the edge; only visible once the face is explored.
        let g = array![[1.0, 3.0], [3.0, 1.0]];
        assert!(matches!(
            minimize(&g, &[0.0, 0.0], Some(&[0.6, 0.4]), 1e-12),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }
}
