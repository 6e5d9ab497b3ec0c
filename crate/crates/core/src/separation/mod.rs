//! Separation by orthogonal rotation search: PCA whitening, the
//! infinity-norm and volume-maximization criteria, the Givens grid search
//! and an exhaustive two-dimensional reference search.

mod criteria;
mod search;
mod whitening;

use serde::{Deserialize, Serialize};

pub use criteria::{j_inf, j_vm, range_per_row, unit_ball_volume, Criterion};
pub use search::{brute_force_2d, givens_search, SeparationOutcome};
pub use whitening::{whiten, WhiteningResult, EIGEN_FLOOR};

use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

pub const DEFAULT_MAX_ITER: usize = 15;
pub const DEFAULT_MU0: f64 = std::f64::consts::PI / 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeparationConfig {
    pub criterion: Criterion,
    /// Skip whitening: the mixing matrix is known to be orthogonal.
    pub orthogonal_mixing: bool,
    pub max_iter: usize,
    /// Initial grid step in radians.
    pub mu0: f64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self {
            criterion: Criterion::Linf,
            orthogonal_mixing: false,
            max_iter: DEFAULT_MAX_ITER,
            mu0: DEFAULT_MU0,
        }
    }
}

impl SeparationConfig {
    pub fn with_criterion(criterion: Criterion) -> Self {
        Self {
            criterion,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Separation<T> {
    /// Present unless the orthogonal-mixing path was taken.
    pub whitening: Option<WhiteningResult<T>>,
    pub outcome: SeparationOutcome<T>,
}

impl<T: Scalar> Separation<T> {
    /// Full linear separator `W B` (`W` alone on the orthogonal path).
    pub fn separator(&self) -> DenseMatrix<T> {
        match &self.whitening {
            Some(wr) => self.outcome.w.matmul(&wr.b).expect("conformable"),
            None => self.outcome.w.clone(),
        }
    }

    pub fn estimates(&self) -> &DenseMatrix<T> {
        &self.outcome.y
    }
}

/// Whitens (unless `orthogonal_mixing`) and runs the rotation search.
///
/// On the orthogonal path row means are removed before the search, since
/// both criteria are sensitive to translation.
pub fn separate<T: Scalar>(x: &DenseMatrix<T>, config: &SeparationConfig) -> Result<Separation<T>> {
    let mu0 = T::lit(config.mu0);
    if config.orthogonal_mixing {
        let (centered, _) = x.center_rows();
        let outcome = givens_search(&centered, config.criterion, config.max_iter, mu0)?;
        Ok(Separation {
            whitening: None,
            outcome,
        })
    } else {
        let wr = whiten(x)?;
        let outcome = givens_search(&wr.x_white, config.criterion, config.max_iter, mu0)?;
        Ok(Separation {
            whitening: Some(wr),
            outcome,
        })
    }
}
