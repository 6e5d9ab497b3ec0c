use crate::error::{contract, Error, Result};
use crate::linalg::{covariance, jacobi_eigen, DenseMatrix, EigenDecomposition};
use crate::scalar::Scalar;

/// Eigenvalues below this fraction of the largest one mean the mixture is
/// rank deficient.
pub const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningResult<T> {
    /// `B = Λ^(-1/2) Eᵀ`, times a near-identity correction when refinement ran.
    pub b: DenseMatrix<T>,
    /// `B (x - mean)`, with identity sample covariance.
    pub x_white: DenseMatrix<T>,
    /// Spectrum of `cov(x)`, descending.
    pub eigenvalues: Vec<T>,
    /// Row means removed before whitening.
    pub means: Vec<T>,
}

/// Refinement passes allowed after the first decomposition.
const MAX_REFINEMENTS: usize = 2;

fn pca_matrix<T: Scalar>(cov: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, EigenDecomposition<T>)> {
    let eig = jacobi_eigen(cov)?;
    let n = cov.rows();
    let lmax = eig.eigenvalues[0];
    let lmin = eig.eigenvalues[n - 1];
    if !(lmax > T::zero()) || lmin < T::lit(EIGEN_FLOOR) * lmax {
        return Err(Error::DegenerateMixture {
            min_eigenvalue: lmin.as_f64(),
            max_eigenvalue: lmax.as_f64(),
        });
    }
    let b = DenseMatrix::from_fn(n, n, |i, j| {
        eig.eigenvectors.get(j, i) / eig.eigenvalues[i].sqrt()
    });
    Ok((b, eig))
}

/// PCA whitening of the mixtures.
///
/// On ill-conditioned mixtures the eigensolver's absolute accuracy leaves
/// `cov(B x)` visibly off the identity; the whitened data is then whitened
/// again, which is well conditioned and converges in one or two passes.
pub fn whiten<T: Scalar>(x: &DenseMatrix<T>) -> Result<WhiteningResult<T>> {
    let n = x.rows();
    let (mut b, eig) = pca_matrix(&covariance(x)?)?;
    let (centered, means) = x.center_rows();
    let mut x_white = b.matmul(&centered)?;
    if x_white.rows() != n {
        return Err(contract("whitening shape mismatch"));
    }
    let tol = T::lit(64.0 * n as f64) * T::epsilon();
    for _ in 0..MAX_REFINEMENTS {
        let cov = covariance(&x_white)?;
        if cov.max_abs_diff(&DenseMatrix::identity(n)) <= tol {
            break;
        }
        // Symmetric C^(-1/2) stays near the identity, unlike Λ^(-1/2) Eᵀ
        // whose eigenvectors are arbitrary for a near-identity C.
        let (half, refined) = pca_matrix(&cov)?;
        let correction = refined.eigenvectors.matmul(&half)?;
        b = correction.matmul(&b)?;
        x_white = correction.matmul(&x_white)?;
    }
    Ok(WhiteningResult {
        b,
        x_white,
        eigenvalues: eig.eigenvalues,
        means,
    })
}
