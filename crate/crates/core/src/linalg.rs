//! Small dense symmetric eigen-solver (cyclic Jacobi).

use ndarray::Array2;

use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a symmetric matrix, unordered. Only the upper triangle is read.
pub(crate) fn symmetric_eigenvalues<T: Scalar>(matrix: &Array2<T>) -> Vec<T> {
    let n = matrix.nrows();
    let mut a = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            a[i * n + j] = matrix[[i, j]];
            a[j * n + i] = matrix[[i, j]];
        }
    }
    jacobi(&mut a, n).0
}

/// Cyclic Jacobi on a full row-major symmetric matrix, which is overwritten.
/// Returns the eigenvalues and the row-major eigenvector matrix (columns).
pub(crate) fn jacobi<T: Scalar>(a: &mut [T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let two = T::lit(2.0);

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag = diag + a[i * n + i] * a[i * n + i];
            for j in (i + 1)..n {
                off = off + a[i * n + j] * a[i * n + j];
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                let (row_p, row_q) = rows_mut(a, n, p, q);
                for k in 0..n {
                    let apk = row_p[k];
                    let aqk = row_q[k];
                    row_p[k] = c * apk - s * aqk;
                    row_q[k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Rows `p < q` of a row-major `n × n` matrix as disjoint slices.
fn rows_mut<T>(a: &mut [T], n: usize, p: usize, q: usize) -> (&mut [T], &mut [T]) {
    let (head, tail) = a.split_at_mut(q * n);
    (&mut head[p * n..(p + 1) * n], &mut tail[..n])
}
