//! Source generators and mixing scenarios: 4-PAM symbol streams, i.i.d.
//! uniform sources, Student-t copula sources with Toeplitz correlation,
//! hypercube vertex injection, linear mixing and additive white noise.

mod special;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use special::{ln_gamma, regularized_incomplete_beta, student_t_cdf};

use crate::error::{contract, Result};
use crate::linalg::{cholesky, toeplitz_correlation, DenseMatrix};
use crate::rng::Rng;
use crate::scalar::Scalar;

/// Vertex injection enumerates `2^N` columns; beyond this it is not sensible.
pub const MAX_VERTEX_DIM: usize = 20;

/// 4-PAM symbol alphabet.
pub const PAM4_SYMBOLS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];
pub const PAM4_UNIFORM: [f64; 4] = [0.25, 0.25, 0.25, 0.25];
/// `P(±3) = 0.375`, `P(±1) = 0.125`.
pub const PAM4_MULTIMODAL: [f64; 4] = [0.375, 0.125, 0.125, 0.375];

/// Finite symbol alphabet with a probability mass function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    symbols: Vec<f64>,
    probabilities: Vec<f64>,
}

impl Constellation {
    pub fn new(symbols: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if symbols.is_empty() || symbols.len() != probabilities.len() {
            return Err(contract("constellation needs one probability per symbol"));
        }
        if symbols.iter().any(|s| !s.is_finite()) || symbols.windows(2).any(|w| w[0] >= w[1]) {
            return Err(contract(
                "constellation symbols must be finite and strictly increasing",
            ));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(contract("symbol probabilities must be nonnegative"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(contract(format!(
                "symbol probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            symbols,
            probabilities,
        })
    }

    /// 4-PAM `{-3, -1, 1, 3}` with probabilities in that symbol order.
    pub fn pam4(probabilities: &[f64]) -> Result<Self> {
        Self::new(PAM4_SYMBOLS.to_vec(), probabilities.to_vec())
    }

    pub fn symbols(&self) -> &[f64] {
        &self.symbols
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn max_magnitude(&self) -> f64 {
        self.symbols.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Minimum Euclidean distance decision. Ties at a midpoint go to the lower symbol.
    pub fn nearest(&self, x: f64) -> f64 {
        let mut best = self.symbols[0];
        let mut best_d = (x - best).abs();
        for &s in &self.symbols[1..] {
            let d = (x - s).abs();
            if d < best_d {
                best = s;
                best_d = d;
            }
        }
        best
    }

    fn cumulative(&self) -> Vec<f64> {
        self.probabilities
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    Pam4Uniform,
    Pam4Multimodal,
    UniformIid,
    CopulaT,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum SourceParams {
    Constellation(Constellation),
    Uniform,
    Copula {
        rho: f64,
        dof: u32,
        /// Mean Pearson correlation between neighbouring sources, measured
        /// on the generated samples before vertex injection.
        realized_correlation: Option<f64>,
    },
    External,
}

/// Source matrix `S` (N×T) with its amplitude bound `A`.
///
/// Every entry lies in `[-A, A]`; this is checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceEnsemble<T> {
    s: DenseMatrix<T>,
    amplitude: T,
    kind: SourceKind,
    params: SourceParams,
    injected: Vec<Range<usize>>,
}

impl<T: Scalar> SourceEnsemble<T> {
    /// Wraps user-supplied sources (e.g. image rows). `amplitude` must bound every entry.
    pub fn external(s: DenseMatrix<T>, amplitude: T) -> Result<Self> {
        Self::build(
            s,
            amplitude,
            SourceKind::External,
            SourceParams::External,
            Vec::new(),
        )
    }

    /// Like [`SourceEnsemble::external`] with the amplitude set to `max |s|`.
    pub fn external_tight(s: DenseMatrix<T>) -> Result<Self> {
        let a = s.max_abs();
        Self::external(s, a)
    }

    fn build(
        s: DenseMatrix<T>,
        amplitude: T,
        kind: SourceKind,
        params: SourceParams,
        injected: Vec<Range<usize>>,
    ) -> Result<Self> {
        if !(amplitude > T::zero()) || !amplitude.is_finite() {
            return Err(contract("amplitude must be positive and finite"));
        }
        if s.max_abs() > amplitude {
            return Err(contract(format!(
                "source entry {} exceeds amplitude {amplitude}",
                s.max_abs()
            )));
        }
        Ok(Self {
            s,
            amplitude,
            kind,
            params,
            injected,
        })
    }

    pub fn sources(&self) -> &DenseMatrix<T> {
        &self.s
    }

    pub fn into_sources(self) -> DenseMatrix<T> {
        self.s
    }

    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn params(&self) -> &SourceParams {
        &self.params
    }

    pub fn n_sources(&self) -> usize {
        self.s.rows()
    }

    pub fn n_samples(&self) -> usize {
        self.s.cols()
    }

    /// Column ranges holding injected hypercube vertices.
    pub fn injected_columns(&self) -> &[Range<usize>] {
        &self.injected
    }

    pub fn is_injected(&self, col: usize) -> bool {
        self.injected.iter().any(|r| r.contains(&col))
    }

    /// Columns that carry generated payload rather than injected vertices.
    pub fn payload_columns(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_samples()).filter(move |&c| !self.is_injected(c))
    }
}

/// Vertex `index` of `{-A, +A}^n`: bit `n-1-i` of `index` set means row `i` is `-A`.
///
/// Index 0 is `(A, …, A)`; for `n = 2` the order is
/// `(A, A), (A, -A), (-A, A), (-A, -A)`.
pub fn hypercube_vertex<T: Scalar>(index: usize, n: usize, amplitude: T) -> Vec<T> {
    (0..n)
        .map(|i| {
            if (index >> (n - 1 - i)) & 1 == 1 {
                -amplitude
            } else {
                amplitude
            }
        })
        .collect()
}

fn check_vertex_dim(n: usize) -> Result<()> {
    if n > MAX_VERTEX_DIM {
        return Err(contract(format!(
            "vertex injection for {n} sources would need 2^{n} columns (limit {MAX_VERTEX_DIM})"
        )));
    }
    Ok(())
}

fn check_dims(n_sources: usize, n_samples: usize) -> Result<()> {
    if n_sources == 0 || n_samples == 0 {
        return Err(contract("need at least one source and one sample"));
    }
    Ok(())
}

/// i.i.d. 4-PAM symbols (`A = 3`).
///
/// `probabilities` are for `-3, -1, 1, 3` in that order. With `inject_extremes`
/// the first `2^N` columns are overwritten by the hypercube vertices, so
/// `n_samples` must be at least `2^N`.
pub fn gen_pam4<T: Scalar>(
    n_sources: usize,
    n_samples: usize,
    probabilities: &[f64],
    inject_extremes: bool,
    rng: &mut Rng,
) -> Result<SourceEnsemble<T>> {
    check_dims(n_sources, n_samples)?;
    let constellation = Constellation::pam4(probabilities)?;
    if inject_extremes {
        check_vertex_dim(n_sources)?;
        if n_samples < (1 << n_sources) {
            return Err(contract(format!(
                "{n_samples} samples cannot hold the {} vertices of {n_sources} sources",
                1usize << n_sources
            )));
        }
    }
    let cdf = constellation.cumulative();
    let mut s = DenseMatrix::from_fn(n_sources, n_samples, |_, _| {
        T::lit(PAM4_SYMBOLS[rng.categorical(&cdf)])
    });
    let mut injected = Vec::new();
    let amplitude = T::lit(3.0);
    if inject_extremes {
        let count = 1 << n_sources;
        for j in 0..count {
            for (i, v) in hypercube_vertex(j, n_sources, amplitude)
                .into_iter()
                .enumerate()
            {
                s.set(i, j, v);
            }
        }
        injected.push(0..count);
    }
    let kind = if probabilities == PAM4_UNIFORM {
        SourceKind::Pam4Uniform
    } else {
        SourceKind::Pam4Multimodal
    };
    SourceEnsemble::build(
        s,
        amplitude,
        kind,
        SourceParams::Constellation(constellation),
        injected,
    )
}

/// i.i.d. uniform sources on `[-A, A)`.
pub fn gen_uniform<T: Scalar>(
    n_sources: usize,
    n_samples: usize,
    amplitude: f64,
    rng: &mut Rng,
) -> Result<SourceEnsemble<T>> {
    check_dims(n_sources, n_samples)?;
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(contract("amplitude must be positive and finite"));
    }
    let s = DenseMatrix::from_fn(n_sources, n_samples, |_, _| {
        T::lit(rng.uniform_in(-amplitude, amplitude))
    });
    SourceEnsemble::build(
        s,
        T::lit(amplitude),
        SourceKind::UniformIid,
        SourceParams::Uniform,
        Vec::new(),
    )
}

/// Correlated sources on `[-1, 1]` from a Student-t copula.
///
/// Each column: `z ~ N(0, Σ)` with Σ the Toeplitz matrix with first row
/// `[1, ρ, …, ρ^(N-1)]`, `w ~ χ²(ν)` as a sum of ν squared normals,
/// `t = z √(ν/w)`, then `s_i = 2 F_ν(t_i) - 1`.
pub fn gen_copula_t<T: Scalar>(
    n_sources: usize,
    n_samples: usize,
    rho: f64,
    dof: u32,
    rng: &mut Rng,
) -> Result<SourceEnsemble<T>> {
    check_dims(n_sources, n_samples)?;
    if !(0.0..1.0).contains(&rho) {
        return Err(contract(format!("copula correlation {rho} outside [0, 1)")));
    }
    if dof == 0 {
        return Err(contract("copula needs at least one degree of freedom"));
    }
    let l = cholesky(&toeplitz_correlation::<f64>(n_sources, rho))?;
    let nu = dof as f64;
    let mut s = DenseMatrix::<T>::zeros(n_sources, n_samples);
    let mut g = vec![0.0; n_sources];
    for col in 0..n_samples {
        g.iter_mut().for_each(|x| *x = rng.gaussian());
        let w = loop {
            let w: f64 = (0..dof).map(|_| rng.gaussian().powi(2)).sum();
            if w > 0.0 {
                break w;
            }
        };
        let scale = (nu / w).sqrt();
        for i in 0..n_sources {
            let z: f64 = (0..=i).map(|k| l.get(i, k) * g[k]).sum();
            let u = student_t_cdf(z * scale, dof);
            s.set(i, col, T::lit(2.0 * u - 1.0));
        }
    }
    let realized_correlation = (n_sources >= 2).then(|| {
        let total: f64 = (0..n_sources - 1)
            .map(|i| pearson_correlation(s.row(i), s.row(i + 1)))
            .sum();
        total / (n_sources - 1) as f64
    });
    SourceEnsemble::build(
        s,
        T::one(),
        SourceKind::CopulaT,
        SourceParams::Copula {
            rho,
            dof,
            realized_correlation,
        },
        Vec::new(),
    )
}

/// Appends every vertex of `{-A, +A}^N` after the existing columns.
pub fn inject_extremes<T: Scalar>(ensemble: &SourceEnsemble<T>) -> Result<SourceEnsemble<T>> {
    let n = ensemble.n_sources();
    check_vertex_dim(n)?;
    let count = 1usize << n;
    let a = ensemble.amplitude();
    let vertices: Vec<Vec<T>> = (0..count).map(|j| hypercube_vertex(j, n, a)).collect();
    let block = DenseMatrix::from_fn(n, count, |i, j| vertices[j][i]);
    let t = ensemble.n_samples();
    let mut injected = ensemble.injected.clone();
    injected.push(t..t + count);
    SourceEnsemble::build(
        ensemble.s.hcat(&block)?,
        a,
        ensemble.kind,
        ensemble.params.clone(),
        injected,
    )
}

/// `X = H S` for a square invertible `H`.
pub fn mix<T: Scalar>(h: &DenseMatrix<T>, sources: &SourceEnsemble<T>) -> Result<DenseMatrix<T>> {
    let n = sources.n_sources();
    if h.shape() != (n, n) {
        return Err(contract(format!(
            "mixing matrix must be {n}x{n}, got {:?}",
            h.shape()
        )));
    }
    if !(h.determinant()?.abs() > T::lit(1e-12)) {
        return Err(contract("mixing matrix is singular"));
    }
    h.matmul(sources.sources())
}

/// Adds white Gaussian noise at `snr_db` relative to each row's mean power.
///
/// `None` or `+∞` means noiseless and returns the input unchanged.
pub fn add_awgn<T: Scalar>(
    x: &DenseMatrix<T>,
    snr_db: Option<f64>,
    rng: &mut Rng,
) -> Result<DenseMatrix<T>> {
    let snr_db = match snr_db {
        None => return Ok(x.clone()),
        Some(v) if v == f64::INFINITY => return Ok(x.clone()),
        Some(v) if !v.is_finite() => return Err(contract(format!("invalid SNR {v} dB"))),
        Some(v) => v,
    };
    let ratio = 10f64.powf(snr_db / 10.0);
    let t = x.cols() as f64;
    let mut sigmas = Vec::with_capacity(x.rows());
    for (i, row) in x.rows_iter().enumerate() {
        let power = row.iter().map(|v| v.as_f64().powi(2)).sum::<f64>() / t;
        if power == 0.0 {
            return Err(contract(format!("row {i} has zero power; SNR undefined")));
        }
        sigmas.push((power / ratio).sqrt());
    }
    let out = DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| {
        x.get(i, j) + T::lit(sigmas[i] * rng.gaussian())
    });
    Ok(out)
}

/// Sample Pearson correlation of two equally long sequences.
pub fn pearson_correlation<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let mb = b.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x.as_f64() - ma, y.as_f64() - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}
