use super::criteria::{row_range, vm_from_parts, Criterion};
use crate::error::{contract, Error, Result};
use crate::linalg::{covariance, givens_matrix, rotate_rows, DenseMatrix};
use crate::scalar::Scalar;

/// Result of the rotation search.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationOutcome<T> {
    /// Orthogonal separating matrix.
    pub w: DenseMatrix<T>,
    /// Estimates `W x` for the matrix the search ran on.
    pub y: DenseMatrix<T>,
    /// `(outer iteration, cost)` after each outer iteration, starting at 1.
    pub cost_trace: Vec<(usize, T)>,
    pub criterion: Criterion,
}

impl<T: Scalar> SeparationOutcome<T> {
    pub fn final_cost(&self) -> T {
        self.cost_trace
            .last()
            .map(|&(_, c)| c)
            .expect("at least one iteration")
    }
}

/// Incremental cost evaluation for rotations in one coordinate plane.
///
/// Only rows `m` and `k` change under a plane rotation, so per-row statistics
/// (infinity norm for `Linf`, range for `Vm`) of the other rows are reused and
/// the estimate covariance is conjugated instead of recomputed.
struct PlaneEvaluator<T> {
    criterion: Criterion,
    y: DenseMatrix<T>,
    stats: Vec<T>,
    cov: Option<DenseMatrix<T>>,
}

struct Candidate<T> {
    cost: T,
    stat_m: T,
    stat_k: T,
    cov: Option<DenseMatrix<T>>,
}

impl<T: Scalar> PlaneEvaluator<T> {
    fn new(criterion: Criterion, y: DenseMatrix<T>) -> Result<Self> {
        let stats = match criterion {
            Criterion::Linf => y.row_inf_norms(),
            Criterion::Vm => y.rows_iter().map(row_range).collect(),
        };
        let cov = match criterion {
            Criterion::Linf => None,
            Criterion::Vm => Some(covariance(&y)?),
        };
        Ok(Self {
            criterion,
            y,
            stats,
            cov,
        })
    }

    fn rotated_stats(&self, m: usize, k: usize, c: T, s: T) -> (T, T) {
        let (rm, rk) = (self.y.row(m), self.y.row(k));
        match self.criterion {
            Criterion::Linf => {
                let (mut nm, mut nk) = (T::zero(), T::zero());
                for (&a, &b) in rm.iter().zip(rk) {
                    nm = nm.max((c * a - s * b).abs());
                    nk = nk.max((s * a + c * b).abs());
                }
                (nm, nk)
            }
            Criterion::Vm => {
                let inf = T::infinity();
                let (mut lo_m, mut hi_m, mut lo_k, mut hi_k) = (inf, -inf, inf, -inf);
                for (&a, &b) in rm.iter().zip(rk) {
                    let u = c * a - s * b;
                    let v = s * a + c * b;
                    lo_m = lo_m.min(u);
                    hi_m = hi_m.max(u);
                    lo_k = lo_k.min(v);
                    hi_k = hi_k.max(v);
                }
                (hi_m - lo_m, hi_k - lo_k)
            }
        }
    }

    fn evaluate(&self, m: usize, k: usize, theta: T) -> Result<Candidate<T>> {
        let (s, c) = theta.sin_cos();
        let (stat_m, stat_k) = self.rotated_stats(m, k, c, s);
        let pick = |i: usize| {
            if i == m {
                stat_m
            } else if i == k {
                stat_k
            } else {
                self.stats[i]
            }
        };
        let n = self.stats.len();
        let (cost, cov) = match self.criterion {
            Criterion::Linf => ((0..n).map(pick).sum(), None),
            Criterion::Vm => {
                let cov = conjugate_plane(self.cov.as_ref().expect("vm covariance"), m, k, c, s);
                let ranges: Vec<T> = (0..n).map(pick).collect();
                let vm = vm_from_parts(n, cov.determinant()?, &ranges)?;
                (-vm, Some(cov))
            }
        };
        if !cost.is_finite() {
            return Err(Error::NonFiniteCost {
                plane_row: m,
                plane_col: k,
                theta: theta.as_f64(),
            });
        }
        Ok(Candidate {
            cost,
            stat_m,
            stat_k,
            cov,
        })
    }

    fn commit(&mut self, m: usize, k: usize, theta: T, cand: Candidate<T>) {
        let (s, c) = theta.sin_cos();
        rotate_rows(&mut self.y, m, k, c, s);
        self.stats[m] = cand.stat_m;
        self.stats[k] = cand.stat_k;
        if cand.cov.is_some() {
            self.cov = cand.cov;
        }
    }
}

/// `T C Tᵀ` for the plane rotation `T` in coordinates `(m, k)`.
fn conjugate_plane<T: Scalar>(
    cov: &DenseMatrix<T>,
    m: usize,
    k: usize,
    c: T,
    s: T,
) -> DenseMatrix<T> {
    let mut out = cov.clone();
    rotate_rows(&mut out, m, k, c, s);
    for i in 0..out.rows() {
        let (a, b) = (out.get(i, m), out.get(i, k));
        out.set(i, m, c * a - s * b);
        out.set(i, k, s * a + c * b);
    }
    out
}

/// Number of grid angles `j·μ` with `0 ≤ j·μ < π`.
fn grid_len<T: Scalar>(mu: T) -> usize {
    let mut j = 0usize;
    while T::from_usize(j).expect("grid index") * mu < T::PI() {
        j += 1;
    }
    j
}

/// Givens-rotation grid search over orthogonal separating matrices.
///
/// Starting from `W = I`, every outer iteration visits each plane `(m, k)`,
/// `m < k`, evaluates the criterion for `T(θ) W x` on the grid
/// `θ ∈ {0, μ, 2μ, …} ∩ [0, π)`, and left-multiplies `W` by the best plane
/// rotation. A plane whose best angle is `θ = 0` leaves `W` unchanged; ties
/// keep the smallest angle. After all planes, `μ ← μ / 1.5`.
pub fn givens_search<T: Scalar>(
    x: &DenseMatrix<T>,
    criterion: Criterion,
    max_iter: usize,
    mu0: T,
) -> Result<SeparationOutcome<T>> {
    let n = x.rows();
    if n < 2 {
        return Err(contract(format!(
            "rotation search needs at least 2 rows, got {n}"
        )));
    }
    if max_iter == 0 {
        return Err(contract("max_iter must be positive"));
    }
    if !(mu0 > T::zero() && mu0 < T::PI()) {
        return Err(contract(format!("initial grid step {mu0} outside (0, π)")));
    }

    let mut w = DenseMatrix::<T>::identity(n);
    let mut eval = PlaneEvaluator::new(criterion, x.clone())?;
    let mut current = T::infinity();
    let mut cost_trace = Vec::with_capacity(max_iter);
    let mut mu = mu0;
    let step_shrink = T::lit(1.5);

    for iter in 1..=max_iter {
        let points = grid_len(mu);
        for m in 0..n - 1 {
            for k in (m + 1)..n {
                let mut best = eval.evaluate(m, k, T::zero())?;
                let mut best_theta = T::zero();
                for j in 1..points {
                    let theta = T::from_usize(j).expect("grid index") * mu;
                    let cand = eval.evaluate(m, k, theta)?;
                    if cand.cost < best.cost {
                        best = cand;
                        best_theta = theta;
                    }
                }
                current = best.cost;
                if best_theta != T::zero() {
                    let (s, c) = best_theta.sin_cos();
                    rotate_rows(&mut w, m, k, c, s);
                    eval.commit(m, k, best_theta, best);
                }
            }
        }
        cost_trace.push((iter, current));
        mu /= step_shrink;
    }

    let y = w.matmul(x)?;
    Ok(SeparationOutcome {
        w,
        y,
        cost_trace,
        criterion,
    })
}

/// Exhaustive 2-D search: evaluates the criterion for `R(θ) x` at
/// `θ_j = jπ / resolution`, `j = 0..resolution`, and returns the smallest
/// minimizing angle with its cost.
pub fn brute_force_2d<T: Scalar>(
    x: &DenseMatrix<T>,
    criterion: Criterion,
    resolution: usize,
) -> Result<(T, T)> {
    if x.rows() != 2 {
        return Err(contract(format!(
            "brute_force_2d needs 2 rows, got {}",
            x.rows()
        )));
    }
    if resolution == 0 {
        return Err(contract("resolution must be positive"));
    }
    let res = T::from_usize(resolution).expect("resolution");
    let mut best = (T::zero(), T::infinity());
    for j in 0..resolution {
        let theta = T::from_usize(j).expect("grid index") * T::PI() / res;
        let y = givens_matrix(2, 0, 1, theta)?.matmul(x)?;
        let cost = criterion.cost(&y)?;
        if cost < best.1 {
            best = (theta, cost);
        }
    }
    Ok(best)
}
