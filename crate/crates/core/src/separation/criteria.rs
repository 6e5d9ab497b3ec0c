use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::linalg::{covariance, DenseMatrix};
use crate::scalar::Scalar;
use crate::signal::ln_gamma;

/// Contrast minimized by the rotation search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Sum of per-estimate infinity norms.
    #[default]
    Linf,
    /// Volume maximization baseline, minimized as `-j_vm`.
    Vm,
}

impl Criterion {
    pub const ALL: [Criterion; 2] = [Criterion::Linf, Criterion::Vm];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Linf => "linf",
            Criterion::Vm => "vm",
        }
    }

    /// Cost to minimize for estimates `y`.
    pub fn cost<T: Scalar>(self, y: &DenseMatrix<T>) -> Result<T> {
        match self {
            Criterion::Linf => Ok(j_inf(y)),
            Criterion::Vm => j_vm(y).map(|v| -v),
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linf" => Ok(Criterion::Linf),
            "vm" => Ok(Criterion::Vm),
            other => Err(contract(format!("unknown criterion '{other}'"))),
        }
    }
}

/// `Σ_i max_n |y_i(n)|`.
pub fn j_inf<T: Scalar>(y: &DenseMatrix<T>) -> T {
    y.row_inf_norms().into_iter().sum()
}

/// Per-row `max_n y_i(n) - min_n y_i(n)`.
pub fn range_per_row<T: Scalar>(y: &DenseMatrix<T>) -> Vec<T> {
    y.rows_iter().map(row_range).collect()
}

pub(crate) fn row_range<T: Scalar>(row: &[T]) -> T {
    let (lo, hi) = row
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

/// Volume of the unit ball in `R^n`, `π^(n/2) / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    (half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)).exp()
}

/// Volume-maximization objective `K_N √det(C(Y)) / Π_i R_i(Y)`.
pub fn j_vm<T: Scalar>(y: &DenseMatrix<T>) -> Result<T> {
    let ranges = range_per_row(y);
    if let Some(i) = ranges.iter().position(|r| *r == T::zero()) {
        return Err(contract(format!(
            "estimate row {i} is constant (zero range)"
        )));
    }
    let det = covariance(y)?.determinant()?;
    vm_from_parts(y.rows(), det, &ranges)
}

pub(crate) fn vm_from_parts<T: Scalar>(n: usize, det: T, ranges: &[T]) -> Result<T> {
    if !(det > T::zero()) {
        return Err(Error::Numerical(format!(
            "estimate covariance determinant {det} is not positive"
        )));
    }
    let k = T::lit(unit_ball_volume(n));
    let prod = ranges.iter().fold(T::one(), |p, &r| p * r);
    Ok(k * det.sqrt() / prod)
}
