//! Executable checks of the identifiability argument behind the infinity-norm
//! criterion: the extraction landscape over unit vectors, the spurious
//! equalizer that full vertex coverage excludes, and the `N·A` lower bound on
//! the sum of norms under orthogonal mixing.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::linalg::{random_orthogonal, DenseMatrix};
use crate::rng::Rng;
use crate::separation::j_inf;
use crate::signal::{SourceEnsemble, MAX_VERTEX_DIM};

/// Tolerance on the theorem's equalities.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Landscape values up to `A + EQUALIZER_TOL` count as equalized.
pub const EQUALIZER_TOL: f64 = 1e-6;
/// "Within one grid cell": angular distance up to this many grid steps.
pub const CELL_SLACK: f64 = 1.5;

/// The three-source vector that satisfies `Σg = 1` and `‖g‖₂ = 1` but is not canonical.
pub const SPURIOUS_3D: [f64; 3] = [-1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];

/// Grid of unit vectors on the circle (N = 2) or sphere (N = 3).
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSweep {
    pub dimension: usize,
    pub vectors: Vec<Vec<f64>>,
    /// Angular spacing of the grid, radians.
    pub step: f64,
}

impl SphereSweep {
    /// `resolution` angles `φ_j = 2πj / resolution` on the unit circle.
    pub fn circle(resolution: usize) -> Result<Self> {
        if resolution < 4 {
            return Err(contract("circle sweep needs at least 4 angles"));
        }
        let step = TAU / resolution as f64;
        let vectors = (0..resolution)
            .map(|j| {
                let (s, c) = (j as f64 * step).sin_cos();
                vec![c, s]
            })
            .collect();
        Ok(Self {
            dimension: 2,
            vectors,
            step,
        })
    }

    /// Spherical-coordinate grid with at least `resolution` points.
    ///
    /// The polar count is even and the azimuthal count a multiple of four, so
    /// all six signed canonical vectors are grid points.
    pub fn sphere(resolution: usize) -> Result<Self> {
        if resolution < 16 {
            return Err(contract("sphere sweep needs at least 16 points"));
        }
        let mut polar = ((resolution as f64 / 2.0).sqrt().round() as usize).max(2);
        polar += polar % 2;
        let mut azimuth = 4 * resolution.div_ceil(4 * (polar + 1));
        azimuth = azimuth.max(4);
        let polar_step = PI / polar as f64;
        let azimuth_step = TAU / azimuth as f64;
        let mut vectors = Vec::with_capacity((polar + 1) * azimuth);
        for i in 0..=polar {
            let (st, ct) = (i as f64 * polar_step).sin_cos();
            for j in 0..azimuth {
                let (sp, cp) = (j as f64 * azimuth_step).sin_cos();
                vectors.push(vec![st * cp, st * sp, ct]);
            }
        }
        Ok(Self {
            dimension: 3,
            vectors,
            step: polar_step.max(azimuth_step),
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Checks that every vertex of `{-A, A}^N` occurs among the source columns.
pub fn check_extreme_points(s: &SourceEnsemble<f64>) -> Result<()> {
    let n = s.n_sources();
    if n > MAX_VERTEX_DIM {
        return Err(contract(format!(
            "vertex check for {n} sources is too large"
        )));
    }
    let a = s.amplitude();
    let x = s.sources();
    let mut seen = vec![false; 1 << n];
    'cols: for j in 0..x.cols() {
        let mut index = 0usize;
        for i in 0..n {
            let v = x.get(i, j);
            if v == -a {
                index |= 1 << (n - 1 - i);
            } else if v != a {
                continue 'cols;
            }
        }
        seen[index] = true;
    }
    match seen.iter().position(|&hit| !hit) {
        None => Ok(()),
        Some(index) => Err(Error::MissingVertex {
            vertex: (0..n)
                .map(|i| {
                    if (index >> (n - 1 - i)) & 1 == 1 {
                        -1
                    } else {
                        1
                    }
                })
                .collect(),
        }),
    }
}

fn extraction_norm(x: &DenseMatrix<f64>, g: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for j in 0..x.cols() {
        let y: f64 = g.iter().enumerate().map(|(i, gi)| gi * x.get(i, j)).sum();
        best = best.max(y.abs());
    }
    best
}

/// `‖gᵀS‖∞` for every vector `g` of the sweep. Requires the extreme points condition.
pub fn infinity_norm_landscape(s: &SourceEnsemble<f64>, sweep: &SphereSweep) -> Result<Vec<f64>> {
    if sweep.dimension != s.n_sources() {
        return Err(contract(format!(
            "sweep dimension {} does not match {} sources",
            sweep.dimension,
            s.n_sources()
        )));
    }
    check_extreme_points(s)?;
    Ok(sweep
        .vectors
        .iter()
        .map(|g| extraction_norm(s.sources(), g))
        .collect())
}

fn l1(g: &[f64]) -> f64 {
    g.iter().map(|v| v.abs()).sum()
}

/// Angle between unit vector `g` and the nearest signed canonical vector.
pub fn canonical_distance(g: &[f64]) -> f64 {
    let peak = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    peak.min(1.0).acos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub vector: Vec<f64>,
    pub value: f64,
    /// Whether the vector equalizes the norm (`value ≤ A + tol`).
    pub equalizes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub n_sources: usize,
    pub amplitude: f64,
    pub points: usize,
    pub grid_step: f64,
    pub min_value: f64,
    pub argmin: Vec<f64>,
    /// `max |‖gᵀS‖∞ - A‖g‖₁|` over the sweep.
    pub max_identity_deviation: f64,
    /// Grid vectors whose value is within tolerance of `A`.
    pub equalizers: usize,
    /// Equalizing vector farthest from a signed canonical vector, with that angle.
    pub worst_equalizer: Option<(Vec<f64>, f64)>,
    pub probes: Vec<Probe>,
    pub passed: bool,
}

/// Exhaustive check of the extraction theorem for two or three sources.
///
/// Asserts over the sweep that `‖gᵀS‖∞ = A‖g‖₁`, that `‖gᵀS‖∞ ≥ A`, and that
/// every vector attaining `A` lies within one grid cell of a signed
/// canonical vector. For three sources the spurious vector
/// `(-1/3, 2/3, 2/3)` is probed and must evaluate to `5A/3`.
pub fn verify_theorem1(s: &SourceEnsemble<f64>, resolution: usize) -> Result<Theorem1Report> {
    let n = s.n_sources();
    let sweep = match n {
        2 => SphereSweep::circle(resolution)?,
        3 => SphereSweep::sphere(resolution)?,
        _ => {
            return Err(contract(format!(
                "theorem sweep supports 2 or 3 sources, got {n}"
            )))
        }
    };
    let values = infinity_norm_landscape(s, &sweep)?;
    let a = s.amplitude();
    let mut report = Theorem1Report {
        n_sources: n,
        amplitude: a,
        points: sweep.len(),
        grid_step: sweep.step,
        min_value: f64::INFINITY,
        argmin: Vec::new(),
        max_identity_deviation: 0.0,
        equalizers: 0,
        worst_equalizer: None,
        probes: Vec::new(),
        passed: false,
    };
    for (g, &value) in sweep.vectors.iter().zip(&values) {
        let deviation = (value - a * l1(g)).abs();
        report.max_identity_deviation = report.max_identity_deviation.max(deviation);
        if deviation > IDENTITY_TOL {
            return Err(Error::Counterexample {
                reason: "landscape differs from A·‖g‖₁".into(),
                vector: g.clone(),
                value,
            });
        }
        if value < report.min_value {
            report.min_value = value;
            report.argmin = g.clone();
        }
        if value < a - IDENTITY_TOL {
            return Err(Error::Counterexample {
                reason: "norm below the amplitude bound".into(),
                vector: g.clone(),
                value,
            });
        }
        if value <= a + EQUALIZER_TOL {
            report.equalizers += 1;
            let dist = canonical_distance(g);
            if report
                .worst_equalizer
                .as_ref()
                .is_none_or(|(_, d)| dist > *d)
            {
                report.worst_equalizer = Some((g.clone(), dist));
            }
            if dist > CELL_SLACK * sweep.step {
                return Err(Error::Counterexample {
                    reason: "non-canonical vector equalizes the norm".into(),
                    vector: g.clone(),
                    value,
                });
            }
        }
    }
    if n == 3 {
        let value = extraction_norm(s.sources(), &SPURIOUS_3D);
        let equalizes = value <= a + EQUALIZER_TOL;
        if equalizes || value < 5.0 * a / 3.0 - 1e-12 {
            return Err(Error::Counterexample {
                reason: "spurious vector not excluded".into(),
                vector: SPURIOUS_3D.to_vec(),
                value,
            });
        }
        report.probes.push(Probe {
            vector: SPURIOUS_3D.to_vec(),
            value,
            equalizes,
        });
    }
    report.passed = true;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationBoundReport {
    pub n_sources: usize,
    pub amplitude: f64,
    /// `N·A`.
    pub bound: f64,
    pub rotations: usize,
    pub min_rotation_cost: f64,
    pub signed_permutations: usize,
    pub max_signed_permutation_deviation: f64,
    pub passed: bool,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn signed_permutation(perm: &[usize], signs: usize) -> DenseMatrix<f64> {
    let n = perm.len();
    DenseMatrix::from_fn(n, n, |i, j| {
        if perm[i] != j {
            0.0
        } else if (signs >> i) & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    })
}

/// Signed permutations are enumerated exhaustively up to this size.
const EXHAUSTIVE_PERM_DIM: usize = 6;

/// Randomized check of `J∞(W S) ≥ N·A` over orthogonal `W`, with equality at
/// signed permutations (all of them for N ≤ 6, `n_random_rotations` random
/// ones beyond).
pub fn verify_separation_bound(
    s: &SourceEnsemble<f64>,
    n_random_rotations: usize,
    rng: &mut Rng,
) -> Result<SeparationBoundReport> {
    check_extreme_points(s)?;
    let n = s.n_sources();
    let a = s.amplitude();
    let bound = n as f64 * a;
    let x = s.sources();

    let mut min_rotation_cost = f64::INFINITY;
    for _ in 0..n_random_rotations {
        let w: DenseMatrix<f64> = random_orthogonal(n, rng)?;
        let cost = j_inf(&w.matmul(x)?);
        min_rotation_cost = min_rotation_cost.min(cost);
        if cost < bound - IDENTITY_TOL {
            return Err(Error::Counterexample {
                reason: "orthogonal separator beats N·A".into(),
                vector: w.into_vec(),
                value: cost,
            });
        }
    }

    let mut perms: Vec<DenseMatrix<f64>> = Vec::new();
    if n <= EXHAUSTIVE_PERM_DIM {
        for p in permutations(n) {
            for signs in 0..(1usize << n) {
                perms.push(signed_permutation(&p, signs));
            }
        }
    } else {
        perms.push(DenseMatrix::identity(n));
        for _ in 0..n_random_rotations {
            let mut p: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                p.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
            }
            perms.push(signed_permutation(&p, rng.next_u64() as usize));
        }
    }
    let mut max_dev = 0.0f64;
    for p in &perms {
        let cost = j_inf(&p.matmul(x)?);
        let dev = (cost - bound).abs();
        max_dev = max_dev.max(dev);
        if dev > IDENTITY_TOL {
            return Err(Error::Counterexample {
                reason: "signed permutation misses N·A".into(),
                vector: p.as_slice().to_vec(),
                value: cost,
            });
        }
    }

    Ok(SeparationBoundReport {
        n_sources: n,
        amplitude: a,
        bound,
        rotations: n_random_rotations,
        min_rotation_cost,
        signed_permutations: perms.len(),
        max_signed_permutation_deviation: max_dev,
        passed: true,
    })
}

/// Length of the smallest interval holding the row, `max - min`.
pub fn lebesgue_measure(row: &[f64]) -> f64 {
    let (lo, hi) = row
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

/// Measure of the Cartesian-product support box, `Π_i (max_i - min_i)`.
pub fn support_measure(s: &DenseMatrix<f64>) -> f64 {
    s.rows_iter().map(lebesgue_measure).product()
}

/// `Π_i ‖y_i‖∞`.
pub fn norm_product(y: &DenseMatrix<f64>) -> f64 {
    y.row_inf_norms().into_iter().product()
}

/// `Σ_i ln ‖y_i‖∞`.
pub fn log_norm_sum(y: &DenseMatrix<f64>) -> f64 {
    y.row_inf_norms().into_iter().map(f64::ln).sum()
}

/// Histogram estimate of differential entropy (nats) with `bins` equal bins
/// spanning the sample range.
pub fn histogram_entropy(row: &[f64], bins: usize) -> Result<f64> {
    if bins == 0 || row.is_empty() {
        return Err(contract("entropy needs samples and at least one bin"));
    }
    let (lo, hi) = row
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let width = (hi - lo) / bins as f64;
    if width == 0.0 {
        return Err(contract("entropy of a constant row is -∞"));
    }
    let mut counts = vec![0usize; bins];
    for &v in row {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let t = row.len() as f64;
    Ok(counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / t;
            -p * (p / width).ln()
        })
        .sum())
}
