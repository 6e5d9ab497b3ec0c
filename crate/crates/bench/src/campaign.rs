use std::time::Instant;

use bca_core::linalg::{random_gaussian_matrix, random_orthogonal};
use bca_core::metrics::{global_matrix, isi, match_sources, psnr, ser, MetricRecord};
use bca_core::rng::label_tag;
use bca_core::signal::{
    add_awgn, gen_copula_t, gen_pam4, inject_extremes, mix, Constellation, SourceParams,
};
use bca_core::{separate, Criterion, Matrix, Rng, SeparationConfig, SourceEnsemble};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Scenario};
use crate::error::{BenchError, Result};
use crate::formats::load_pgm;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "BCA_WORKERS";
/// Largest tolerated fraction of failed trials.
pub const MAX_FAILED_FRACTION: f64 = 0.10;

const STREAM_SOURCES: u64 = 1;
const STREAM_MIXING: u64 = 2;
const STREAM_NOISE: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub method: Criterion,
    pub snr_db: Option<f64>,
    pub rho: Option<f64>,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellLog {
    pub snr_db: Option<f64>,
    pub rho: Option<f64>,
    /// Output correlation of the generated sources, copula scenario only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realized_correlation: Option<f64>,
    /// SHA-256 of the observation matrix handed to each method, in method order.
    pub mixture_digests: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialLog {
    pub trial: usize,
    pub wall_clock_s: f64,
    pub cells: Vec<CellLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialFailure {
    pub trial: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<MetricRecord>,
    pub aggregates: Vec<Aggregate>,
    pub trials: Vec<TrialLog>,
    pub failures: Vec<TrialFailure>,
}

impl ExperimentReport {
    pub fn aggregate(
        &self,
        method: Criterion,
        snr_db: Option<f64>,
        rho: Option<f64>,
        metric: &str,
    ) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| {
            a.method == method && a.snr_db == snr_db && a.rho == rho && a.metric == metric
        })
    }

    /// Mean of the scenario's headline metric for one cell.
    pub fn headline_mean(
        &self,
        method: Criterion,
        snr_db: Option<f64>,
        rho: Option<f64>,
    ) -> Option<f64> {
        let metric = headline_metric(self.config.scenario);
        self.aggregate(method, snr_db, rho, metric).map(|a| a.mean)
    }
}

pub fn headline_metric(scenario: Scenario) -> &'static str {
    match scenario {
        Scenario::Pam4 => "ser_percent",
        Scenario::Images => "psnr_db",
        Scenario::Copula => "isi_db",
    }
}

fn bits(v: Option<f64>) -> u64 {
    v.map_or(u64::MAX, f64::to_bits)
}

pub fn matrix_digest(m: &Matrix) -> String {
    let mut h = Sha256::new();
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

struct Prepared {
    config: ExperimentConfig,
    tag: u64,
    constellation: Option<Constellation>,
    images: Option<SourceEnsemble>,
}

impl Prepared {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let constellation = match config.scenario {
            Scenario::Pam4 => Some(Constellation::pam4(&config.probabilities())?),
            _ => None,
        };
        let images = match config.scenario {
            Scenario::Images => Some(load_images(config)?),
            _ => None,
        };
        Ok(Self {
            config: config.clone(),
            tag: label_tag(config.scenario.name()),
            constellation,
            images,
        })
    }

    fn sources(&self, rho: Option<f64>, rng: &mut Rng) -> Result<SourceEnsemble> {
        let c = &self.config;
        let inject = c.injects();
        let s = match c.scenario {
            Scenario::Pam4 => {
                let extra = if inject { 1 << c.n_sources } else { 0 };
                gen_pam4(
                    c.n_sources,
                    c.n_samples + extra,
                    &c.probabilities(),
                    inject,
                    rng,
                )?
            }
            Scenario::Copula => {
                let rho = rho.expect("copula cells carry rho");
                let s = gen_copula_t(c.n_sources, c.n_samples, rho, c.dof, rng)?;
                if inject {
                    inject_extremes(&s)?
                } else {
                    s
                }
            }
            Scenario::Images => {
                let s = self.images.clone().expect("images loaded");
                if inject {
                    inject_extremes(&s)?
                } else {
                    s
                }
            }
        };
        Ok(s)
    }

    fn mixing(&self, rng: &mut Rng) -> Result<Matrix> {
        let n = self.config.n_sources;
        Ok(match self.config.scenario {
            Scenario::Copula => random_orthogonal(n, rng)?,
            _ => random_gaussian_matrix(n, n, rng)?,
        })
    }

    fn evaluate(
        &self,
        method: Criterion,
        x: &Matrix,
        h: &Matrix,
        s: &SourceEnsemble,
        key: (usize, Option<f64>, Option<f64>),
    ) -> Result<MetricRecord> {
        let c = &self.config;
        let sep_config = SeparationConfig {
            criterion: method,
            orthogonal_mixing: c.scenario == Scenario::Copula,
            max_iter: c.max_iter,
            mu0: c.mu0,
        };
        let sep = separate(x, &sep_config)?;
        let g = global_matrix(&sep.outcome.w, sep.whitening.as_ref().map(|w| &w.b), h)?;
        let (trial, snr_db, rho) = key;
        let mut record = MetricRecord {
            method,
            n_sources: c.n_sources,
            snr_db,
            rho,
            trial,
            ser_percent: None,
            psnr_db: None,
            isi_db: None,
        };
        match c.scenario {
            Scenario::Pam4 => {
                let matching = match_sources(&g)?;
                let constellation = self.constellation.as_ref().expect("pam4 constellation");
                record.ser_percent = Some(ser(sep.estimates(), s, &matching, constellation)?);
            }
            Scenario::Images => {
                let y = sep.estimates().columns(0..c.n_samples)?;
                let values = s
                    .sources()
                    .rows_iter()
                    .map(|row| psnr(&row[..c.n_samples], &y))
                    .collect::<bca_core::Result<Vec<_>>>()?;
                record.psnr_db = Some(values);
            }
            Scenario::Copula => record.isi_db = Some(isi(&g)?),
        }
        Ok(record)
    }

    fn trial(&self, trial: usize) -> Result<(Vec<MetricRecord>, TrialLog)> {
        let started = Instant::now();
        let c = &self.config;
        let master = c.master_seed;
        let t = trial as u64;
        let h = self.mixing(&mut Rng::derive(master, &[t, self.tag, STREAM_MIXING]))?;
        let mut records = Vec::with_capacity(c.cells_per_trial());
        let mut cells = Vec::new();
        for rho in c.rho_values() {
            let mut src_rng = Rng::derive(master, &[t, self.tag, STREAM_SOURCES, bits(rho)]);
            let s = self.sources(rho, &mut src_rng)?;
            let x = mix(&h, &s)?;
            let realized_correlation = match s.params() {
                SourceParams::Copula {
                    realized_correlation,
                    ..
                } => *realized_correlation,
                _ => None,
            };
            for &snr in &c.snr_db_list {
                let mut noise_rng =
                    Rng::derive(master, &[t, self.tag, STREAM_NOISE, bits(rho), bits(snr)]);
                let xn = add_awgn(&x, snr, &mut noise_rng)?;
                let mut digests = Vec::with_capacity(c.methods.len());
                for &method in &c.methods {
                    digests.push(matrix_digest(&xn));
                    records.push(self.evaluate(method, &xn, &h, &s, (trial, snr, rho))?);
                }
                cells.push(CellLog {
                    snr_db: snr,
                    rho,
                    realized_correlation,
                    mixture_digests: digests,
                });
            }
        }
        let log = TrialLog {
            trial,
            wall_clock_s: started.elapsed().as_secs_f64(),
            cells,
        };
        Ok((records, log))
    }
}

fn load_images(config: &ExperimentConfig) -> Result<SourceEnsemble> {
    let mut rows = Vec::with_capacity(config.image_paths.len());
    for path in &config.image_paths {
        let img = load_pgm(path)?;
        if img.pixels.cols() != config.n_samples {
            return Err(BenchError::Config(format!(
                "{} has {} pixels but n_samples is {}",
                path.display(),
                img.pixels.cols(),
                config.n_samples
            )));
        }
        rows.push(img.pixels.into_vec());
    }
    Ok(SourceEnsemble::external_tight(Matrix::from_rows(&rows)?)?)
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(BenchError::Config(format!(
                "{WORKERS_ENV}={v} is not a positive integer"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-cell mean and standard deviation of every metric, in config order.
pub fn aggregate(config: &ExperimentConfig, records: &[MetricRecord]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for rho in config.rho_values() {
        for &snr in &config.snr_db_list {
            for &method in &config.methods {
                let cell: Vec<&MetricRecord> = records
                    .iter()
                    .filter(|r| r.method == method && r.snr_db == snr && r.rho == rho)
                    .collect();
                let mut names: Vec<String> = Vec::new();
                let mut columns: Vec<Vec<f64>> = Vec::new();
                for r in &cell {
                    let mut metrics = r.metrics();
                    if let Some(("psnr_db", v)) = r.headline() {
                        metrics.push(("psnr_db".into(), v));
                    }
                    for (name, v) in metrics {
                        match names.iter().position(|n| *n == name) {
                            Some(i) => columns[i].push(v),
                            None => {
                                names.push(name);
                                columns.push(vec![v]);
                            }
                        }
                    }
                }
                for (metric, values) in names.into_iter().zip(columns) {
                    let (mean, std) = mean_std(&values);
                    out.push(Aggregate {
                        method,
                        snr_db: snr,
                        rho,
                        metric,
                        count: values.len(),
                        mean,
                        std,
                    });
                }
            }
        }
    }
    out
}

/// Runs every trial on a worker pool and gathers results in trial order.
pub fn run_campaign(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let prepared = Prepared::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| BenchError::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<Result<(Vec<MetricRecord>, TrialLog)>> = pool.install(|| {
        (0..config.n_trials)
            .into_par_iter()
            .map(|trial| prepared.trial(trial))
            .collect()
    });

    let mut records = Vec::with_capacity(config.n_trials * config.cells_per_trial());
    let mut trials = Vec::with_capacity(config.n_trials);
    let mut failures = Vec::new();
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((r, log)) => {
                records.extend(r);
                trials.push(log);
            }
            Err(e) => failures.push(TrialFailure {
                trial,
                error: e.to_string(),
            }),
        }
    }
    if failures.len() as f64 > MAX_FAILED_FRACTION * config.n_trials as f64 {
        return Err(BenchError::Campaign {
            failed: failures.len(),
            total: config.n_trials,
            first: failures[0].error.clone(),
        });
    }
    let aggregates = aggregate(config, &records);
    Ok(ExperimentReport {
        config: config.clone(),
        records,
        aggregates,
        trials,
        failures,
    })
}
