use super::DenseMatrix;
use crate::error::{contract, Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;

/// Plane rotation in coordinates `(m, k)` of `R^n`, zero-based with `m < k < n`.
///
/// Identity except `T[m,m] = T[k,k] = cos θ`, `T[m,k] = -sin θ`, `T[k,m] = sin θ`.
pub fn givens_matrix<T: Scalar>(n: usize, m: usize, k: usize, theta: T) -> Result<DenseMatrix<T>> {
    if !(m < k && k < n) {
        return Err(contract(format!(
            "givens plane ({m}, {k}) invalid for dimension {n}"
        )));
    }
    let (s, c) = theta.sin_cos();
    let mut g = DenseMatrix::identity(n);
    g.set(m, m, c);
    g.set(k, k, c);
    g.set(m, k, -s);
    g.set(k, m, s);
    Ok(g)
}

/// Applies the rotation `givens_matrix(_, m, k, θ)` from the left, in place,
/// touching only rows `m` and `k`.
pub(crate) fn rotate_rows<T: Scalar>(x: &mut DenseMatrix<T>, m: usize, k: usize, cos: T, sin: T) {
    let (rm, rk) = x.row_pair_mut(m, k);
    for (a, b) in rm.iter_mut().zip(rk.iter_mut()) {
        let (u, v) = (*a, *b);
        *a = cos * u - sin * v;
        *b = sin * u + cos * v;
    }
}

/// i.i.d. standard normal entries (Box–Muller).
pub fn random_gaussian_matrix<T: Scalar>(
    rows: usize,
    cols: usize,
    rng: &mut Rng,
) -> Result<DenseMatrix<T>> {
    if rows == 0 || cols == 0 {
        return Err(contract("random matrix dimensions must be positive"));
    }
    let data = (0..rows * cols).map(|_| T::lit(rng.gaussian())).collect();
    DenseMatrix::from_vec(rows, cols, data)
}

const ORTHO_RETRIES: usize = 10;

/// Random orthogonal matrix: modified Gram–Schmidt with one
/// re-orthogonalization pass over the columns of a Gaussian matrix.
///
/// A (numerically) dependent draw is discarded and redrawn from the advanced
/// generator state, at most 10 times.
pub fn random_orthogonal<T: Scalar>(n: usize, rng: &mut Rng) -> Result<DenseMatrix<T>> {
    if n < 2 {
        return Err(contract(format!("random_orthogonal needs n >= 2, got {n}")));
    }
    for _ in 0..ORTHO_RETRIES {
        let g: DenseMatrix<T> = random_gaussian_matrix(n, n, rng)?;
        if let Some(q) = gram_schmidt_columns(&g) {
            return Ok(q);
        }
    }
    Err(Error::Numerical(format!(
        "random_orthogonal: {ORTHO_RETRIES} rank-deficient draws"
    )))
}

fn gram_schmidt_columns<T: Scalar>(a: &DenseMatrix<T>) -> Option<DenseMatrix<T>> {
    let n = a.rows();
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let mut v = a.column(j);
        let original = norm(&v);
        for _pass in 0..2 {
            for q in &basis {
                let d = dot(q, &v);
                for (vi, &qi) in v.iter_mut().zip(q) {
                    *vi -= d * qi;
                }
            }
        }
        let r = norm(&v);
        if !(r > T::lit(1e-10) * original) {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= r);
        basis.push(v);
    }
    Some(DenseMatrix::from_fn(n, a.cols(), |i, j| basis[j][i]))
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    type M = DenseMatrix<f64>;

    #[test]
    fn zero_angle_is_identity() {
        assert_eq!(givens_matrix(4, 1, 3, 0.0).unwrap(), M::identity(4));
    }

    #[test]
    fn quarter_turn() {
        let g = givens_matrix(2, 0, 1, FRAC_PI_2).unwrap();
        let expected = M::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        assert!(g.max_abs_diff(&expected) < 1e-16);
    }

    #[test]
    fn inverse_rotation() {
        let a = givens_matrix(5, 1, 4, 0.7).unwrap();
        let b = givens_matrix(5, 1, 4, -0.7).unwrap();
        assert!(a.matmul(&b).unwrap().max_abs_diff(&M::identity(5)) <= 1e-14);
    }

    #[test]
    fn invalid_planes() {
        assert!(givens_matrix::<f64>(3, 1, 1, 0.1).is_err());
        assert!(givens_matrix::<f64>(3, 2, 1, 0.1).is_err());
        assert!(givens_matrix::<f64>(3, 1, 3, 0.1).is_err());
    }

    #[test]
    fn determinant_is_plus_one() {
        let g = givens_matrix::<f64>(3, 0, 2, 1.234).unwrap();
        assert!((g.determinant().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn in_place_rotation_matches_product() {
        let mut rng = Rng::new(1);
        let x: M = random_gaussian_matrix(4, 30, &mut rng).unwrap();
        let g = givens_matrix(4, 1, 3, 0.4).unwrap();
        let mut y = x.clone();
        let (s, c) = 0.4f64.sin_cos();
        rotate_rows(&mut y, 1, 3, c, s);
        assert!(y.max_abs_diff(&g.matmul(&x).unwrap()) < 1e-15);
    }

    #[test]
    fn orthogonal_has_unit_rows_and_unit_determinant() {
        let mut rng = Rng::new(5);
        for n in [2, 3, 7] {
            let q: M = random_orthogonal(n, &mut rng).unwrap();
            assert!(q.orthogonality_defect() <= 1e-10);
            for r in q.rows_iter() {
                let norm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
            }
            let d = q.determinant().unwrap();
            assert!((d.abs() - 1.0).abs() < 1e-8, "det {d}");
        }
        assert!(random_orthogonal::<f64>(1, &mut rng).is_err());
    }

    #[test]
    fn gaussian_matrix_is_deterministic_and_invertible() {
        let a: M = random_gaussian_matrix(2, 2, &mut Rng::new(9)).unwrap();
        let b: M = random_gaussian_matrix(2, 2, &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.determinant().unwrap().abs() > 0.0);
    }

    #[test]
    fn dependent_columns_rejected() {
        let a = M::from_rows(&[[1.0, 2.0], [1.0, 2.0]]).unwrap();
        assert!(gram_schmidt_columns(&a).is_none());
    }
}
