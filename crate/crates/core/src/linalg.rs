//! Small dense helpers for the tiny matrices this crate handles.

use crate::scalar::Scalar;

/// Eigenvalues of a symmetric `d×d` row-major matrix by cyclic Jacobi sweeps.
pub fn symmetric_eigenvalues<S: Scalar>(matrix: &[S], d: usize) -> Vec<S> {
    let mut a = matrix.to_vec();
    let eps = S::epsilon();
    for _sweep in 0..64 {
        let mut off = S::zero();
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[p * d + q] * a[p * d + q];
            }
        }
        let scale: S = a.iter().map(|v| *v * *v).sum::<S>() + S::min_positive_value();
        if off <= eps * eps * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq == S::zero() {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let tau = (aqq - app) / (S::of(2.0) * apq);
                let t = tau.signum() / (tau.abs() + (S::one() + tau * tau).sqrt());
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..d).map(|i| a[i * d + i]).collect()
}

/// `C = A · B` for row-major `d×d` matrices.
pub(crate) fn matmul_square<S: Scalar>(a: &[S], b: &[S], d: usize, out: &mut [S]) {
    for r in 0..d {
        for c in 0..d {
            let mut acc = S::zero();
            for k in 0..d {
                acc += a[r * d + k] * b[k * d + c];
            }
            out[r * d + c] = acc;
        }
    }
}

pub(crate) fn identity<S: Scalar>(d: usize) -> Vec<S> {
    let mut m = vec![S::zero(); d * d];
    for i in 0..d {
        m[i * d + i] = S::one();
    }
    m
}

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `lower[0]` and `upper[n-1]` are ignored. Returns the index of the first
/// vanishing pivot on failure.
pub(crate) fn solve_tridiagonal<S: Scalar>(
    lower: &[S],
    diag: &[S],
    upper: &[S],
    rhs: &mut [S],
    scratch: &mut Vec<S>,
) -> Result<(), usize> {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, S::zero());
    let tiny = S::min_positive_value();
    let mut pivot = diag[0];
    if pivot.abs() <= tiny {
        return Err(0);
    }
    scratch[0] = upper[0] / pivot;
    rhs[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        if pivot.abs() <= tiny || !pivot.is_finite() {
            return Err(i);
        }
        if i + 1 < n {
            scratch[i] = upper[i] / pivot;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - scratch[i] * rhs[i + 1];
    }
    Ok(())
}
