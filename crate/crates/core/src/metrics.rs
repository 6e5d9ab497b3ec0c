//! Separation quality: global matrix, ISI, permutation/scale matching,
//! symbol error rate and PSNR.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;
use crate::separation::Criterion;
use crate::signal::{Constellation, SourceEnsemble};

/// Floor reported for numerically perfect ISI rows (the exact value is -∞).
pub const ISI_FLOOR_DB: f64 = -300.0;
/// Ceiling reported when the PSNR error energy vanishes.
pub const PSNR_CEILING_DB: f64 = 120.0;

/// `G = W B H`; pass `None` for `B` on the orthogonal-mixing path.
pub fn global_matrix<T: Scalar>(
    w: &DenseMatrix<T>,
    b: Option<&DenseMatrix<T>>,
    h: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    match b {
        Some(b) => w.matmul(b)?.matmul(h),
        None => w.matmul(h),
    }
}

fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v.into_iter().sum()
}

/// Per-row ISI in dB, clamped below at [`ISI_FLOOR_DB`].
pub fn isi_rows<T: Scalar>(g: &DenseMatrix<T>) -> Result<Vec<f64>> {
    if !g.is_square() {
        return Err(contract("ISI needs a square global matrix"));
    }
    g.rows_iter()
        .enumerate()
        .map(|(i, row)| {
            let sq: Vec<f64> = row.iter().map(|v| v.as_f64().powi(2)).collect();
            let peak = sq.iter().copied().fold(0.0, f64::max);
            if peak == 0.0 {
                return Err(contract(format!("global matrix row {i} is all zeros")));
            }
            // Sorted summation makes the value exactly invariant to column order.
            let off = sorted_sum(sq) - peak;
            let db = 10.0 * (off.max(0.0) / peak).log10();
            Ok(db.max(ISI_FLOOR_DB))
        })
        .collect()
}

/// Mean per-row intersymbol interference of the global matrix, in dB.
pub fn isi<T: Scalar>(g: &DenseMatrix<T>) -> Result<f64> {
    let rows = isi_rows(g)?;
    let n = rows.len() as f64;
    Ok(sorted_sum(rows) / n)
}

/// Assignment of estimates to sources resolved from the global matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<T> {
    /// `estimate_of_source[l]` is the estimate row carrying source `l`.
    pub estimate_of_source: Vec<usize>,
    /// `source_of_estimate[i]` is the source carried by estimate row `i`.
    pub source_of_estimate: Vec<usize>,
    /// `gains[i] = G[i, source_of_estimate[i]]`.
    pub gains: Vec<T>,
    /// `G` with the matched entries set to zero.
    pub residual: DenseMatrix<T>,
}

impl<T: Scalar> MatchResult<T> {
    /// Gain with which source `l` appears in its matched estimate.
    pub fn gain_of_source(&self, l: usize) -> T {
        self.gains[self.estimate_of_source[l]]
    }
}

/// Greedy dominant-entry matching.
///
/// Repeatedly takes the largest-magnitude entry among unassigned rows and
/// columns (ties: smallest row, then smallest column).
pub fn match_sources<T: Scalar>(g: &DenseMatrix<T>) -> Result<MatchResult<T>> {
    if !g.is_square() {
        return Err(contract("matching needs a square global matrix"));
    }
    let n = g.rows();
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; n];
    let mut source_of_estimate = vec![0; n];
    let mut estimate_of_source = vec![0; n];
    let mut gains = vec![T::zero(); n];
    let mut residual = g.clone();
    for _ in 0..n {
        let mut best: Option<(usize, usize, T)> = None;
        for i in (0..n).filter(|&i| !row_used[i]) {
            for j in (0..n).filter(|&j| !col_used[j]) {
                let v = g.get(i, j).abs();
                if best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((i, j, v));
                }
            }
        }
        let (i, j, _) = best.expect("unassigned pair");
        row_used[i] = true;
        col_used[j] = true;
        source_of_estimate[i] = j;
        estimate_of_source[j] = i;
        gains[i] = g.get(i, j);
        residual.set(i, j, T::zero());
    }
    Ok(MatchResult {
        estimate_of_source,
        source_of_estimate,
        gains,
        residual,
    })
}

/// Symbol error rate in percent after minimum-distance decisions.
///
/// Each source's matched estimate is divided by its gain and decided to the
/// nearest constellation symbol. Injected vertex columns are not counted.
pub fn ser<T: Scalar>(
    y: &DenseMatrix<T>,
    truth: &SourceEnsemble<T>,
    matching: &MatchResult<T>,
    constellation: &Constellation,
) -> Result<f64> {
    let n = truth.n_sources();
    if y.shape() != truth.sources().shape() || matching.gains.len() != n {
        return Err(contract(
            "estimates, sources and matching disagree in shape",
        ));
    }
    let payload: Vec<usize> = truth.payload_columns().collect();
    if payload.is_empty() {
        return Err(contract("no payload columns to score"));
    }
    let mut errors = 0usize;
    for l in 0..n {
        let gain = matching.gain_of_source(l);
        if gain == T::zero() {
            return Err(contract(format!("source {l} matched with zero gain")));
        }
        let est = y.row(matching.estimate_of_source[l]);
        let src = truth.sources().row(l);
        errors += payload
            .iter()
            .filter(|&&c| constellation.nearest((est[c] / gain).as_f64()) != src[c].as_f64())
            .count();
    }
    Ok(100.0 * errors as f64 / (n * payload.len()) as f64)
}

/// Peak signal-to-noise ratio of a source against its best-matching estimate.
///
/// Each estimate row is first fitted to the source by least squares
/// (`a y_j + c`), then `10 log10(max s² / MSE)`; the maximum over rows is
/// returned, clamped at [`PSNR_CEILING_DB`].
pub fn psnr<T: Scalar>(source: &[T], y: &DenseMatrix<T>) -> Result<f64> {
    if source.len() != y.cols() {
        return Err(contract("source and estimates differ in length"));
    }
    let s: Vec<f64> = source.iter().map(|v| v.as_f64()).collect();
    let t = s.len() as f64;
    let ms = s.iter().sum::<f64>() / t;
    let var_s = s.iter().map(|v| (v - ms).powi(2)).sum::<f64>();
    if var_s == 0.0 {
        return Err(contract("source row is constant"));
    }
    let peak = s.iter().map(|v| v * v).fold(0.0, f64::max);
    let mut best = f64::NEG_INFINITY;
    for row in y.rows_iter() {
        let yj: Vec<f64> = row.iter().map(|v| v.as_f64()).collect();
        let my = yj.iter().sum::<f64>() / t;
        let (mut syy, mut sys) = (0.0, 0.0);
        for (a, b) in yj.iter().zip(&s) {
            syy += (a - my).powi(2);
            sys += (a - my) * (b - ms);
        }
        let slope = if syy > 0.0 { sys / syy } else { 0.0 };
        let mse = yj
            .iter()
            .zip(&s)
            .map(|(a, b)| (b - (ms + slope * (a - my))).powi(2))
            .sum::<f64>()
            / t;
        let db = if mse < 1e-12 * peak {
            PSNR_CEILING_DB
        } else {
            (10.0 * (peak / mse).log10()).min(PSNR_CEILING_DB)
        };
        best = best.max(db);
    }
    Ok(best)
}

/// One evaluated (trial, cell, method) data point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricRecord {
    pub method: Criterion,
    pub n_sources: usize,
    /// `None` for noiseless runs.
    pub snr_db: Option<f64>,
    pub rho: Option<f64>,
    pub trial: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ser_percent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psnr_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isi_db: Option<f64>,
}

impl MetricRecord {
    /// `(metric name, value)` pairs in a fixed order.
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        if let Some(v) = self.ser_percent {
            out.push(("ser_percent".to_string(), v));
        }
        if let Some(p) = &self.psnr_db {
            out.extend(
                p.iter()
                    .enumerate()
                    .map(|(i, &v)| (format!("psnr_db_{i}"), v)),
            );
        }
        if let Some(v) = self.isi_db {
            out.push(("isi_db".to_string(), v));
        }
        out
    }

    /// Summary value used for aggregation: SER, mean PSNR or ISI.
    pub fn headline(&self) -> Option<(&'static str, f64)> {
        if let Some(v) = self.ser_percent {
            Some(("ser_percent", v))
        } else if let Some(p) = &self.psnr_db {
            Some(("psnr_db", p.iter().sum::<f64>() / p.len() as f64))
        } else {
            self.isi_db.map(|v| ("isi_db", v))
        }
    }
}
