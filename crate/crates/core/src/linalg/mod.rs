//! Dense linear algebra: matrix type, covariance, symmetric eigensolver,
//! plane rotations and random matrix generation.

mod eigen;
mod matrix;
mod rotation;

pub use eigen::{jacobi_eigen, EigenDecomposition};
pub use matrix::DenseMatrix;
pub(crate) use rotation::rotate_rows;
pub use rotation::{givens_matrix, random_gaussian_matrix, random_orthogonal};

use crate::error::{contract, Result};
use crate::scalar::Scalar;

/// Sample covariance `(1/T) X_c X_cᵀ` with per-row means removed.
///
/// The result is exactly symmetric (the upper triangle is mirrored).
pub fn covariance<T: Scalar>(x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if x.cols() < 2 {
        return Err(contract(format!(
            "covariance needs at least 2 samples, got {}",
            x.cols()
        )));
    }
    let (xc, _) = x.center_rows();
    let n = x.rows();
    let t = T::from_usize(x.cols()).expect("sample count");
    let mut c = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: T = xc.row(i).iter().zip(xc.row(j)).map(|(&a, &b)| a * b).sum();
            c.set(i, j, s / t);
            c.set(j, i, s / t);
        }
    }
    c.check_finite("covariance")?;
    Ok(c)
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = a`.
pub fn cholesky<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_symmetric(T::lit(1e-12)) {
        return Err(contract("cholesky input must be symmetric"));
    }
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > T::zero()) {
            return Err(contract(format!(
                "matrix is not positive definite (pivot {j} = {d})"
            )));
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    Ok(l)
}

/// Symmetric Toeplitz matrix with first row `[1, ρ, ρ², …, ρ^(n-1)]`.
pub fn toeplitz_correlation<T: Scalar>(n: usize, rho: T) -> DenseMatrix<T> {
    DenseMatrix::from_fn(n, n, |i, j| rho.powi(i.abs_diff(j) as i32))
}
