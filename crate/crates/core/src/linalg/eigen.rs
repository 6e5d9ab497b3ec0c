use super::DenseMatrix;
use crate::error::{contract, Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;
const MAX_DIM: usize = 64;

/// Symmetric eigendecomposition `C = E Λ Eᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T> {
    /// Sorted in descending order.
    pub eigenvalues: Vec<T>,
    /// Column `j` is the unit eigenvector for `eigenvalues[j]`.
    pub eigenvectors: DenseMatrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let lambda = DenseMatrix::from_diagonal(&self.eigenvalues).expect("nonempty");
        self.eigenvectors
            .matmul(&lambda)
            .and_then(|el| el.matmul(&self.eigenvectors.transpose()))
            .expect("square factors")
    }
}

fn max_off_diagonal<T: Scalar>(a: &[T], n: usize) -> T {
    let mut m = T::zero();
    for p in 0..n {
        for q in (p + 1)..n {
            m = m.max(a[p * n + q].abs());
        }
    }
    m
}

/// Cyclic Jacobi eigensolver for symmetric matrices up to 64×64.
///
/// Sweeps rotate every `(p, q)` pair in row order until all off-diagonal
/// magnitudes are at or below `1e-12` (or a few ulps of the matrix scale,
/// whichever is larger), for at most 100 sweeps. Eigenvectors are signed so
/// that their largest-magnitude component is positive.
pub fn jacobi_eigen<T: Scalar>(c: &DenseMatrix<T>) -> Result<EigenDecomposition<T>> {
    if !c.is_square() {
        return Err(contract(format!(
            "eigen input must be square, got {:?}",
            c.shape()
        )));
    }
    let n = c.rows();
    if n > MAX_DIM {
        return Err(contract(format!(
            "eigen input dimension {n} exceeds {MAX_DIM}"
        )));
    }
    let scale = c.max_abs();
    if !c.is_symmetric(T::lit(1e-10) * scale.max(T::one())) {
        return Err(contract("eigen input is not symmetric"));
    }

    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(4.0) * scale);
    let mut a = c.as_slice().to_vec();
    // Symmetrize exactly so both triangles evolve identically.
    for p in 0..n {
        for q in (p + 1)..n {
            let m = (a[p * n + q] + a[q * n + p]) * T::lit(0.5);
            a[p * n + q] = m;
            a[q * n + p] = m;
        }
    }
    let mut v = DenseMatrix::<T>::identity(n).into_vec();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if max_off_diagonal(&a, n) <= tol {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::lit(2.0) * apq);
                let t = if theta.abs() > T::lit(1e150) {
                    T::one() / (T::lit(2.0) * theta)
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cs * akp - sn * akq;
                    a[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cs * apk - sn * aqk;
                    a[q * n + k] = sn * apk + cs * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = cs * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    if !converged {
        let residual = max_off_diagonal(&a, n);
        if residual > tol {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                residual: residual.as_f64(),
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .expect("finite eigenvalues")
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<T> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col: Vec<T> = (0..n).map(|k| v[k * n + src]).collect();
        let lead = col.iter().copied().fold(
            T::zero(),
            |best, x| if x.abs() > best.abs() { x } else { best },
        );
        let sign = if lead < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        for (k, x) in col.into_iter().enumerate() {
            vectors.set(k, dst, sign * x);
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}
