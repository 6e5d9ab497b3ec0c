use std::path::{Path, PathBuf};

use bca_core::separation::{DEFAULT_MAX_ITER, DEFAULT_MU0};
use bca_core::signal::{MAX_VERTEX_DIM, PAM4_UNIFORM};
use bca_core::Criterion;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Pam4,
    Images,
    Copula,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Pam4 => "pam4",
            Scenario::Images => "images",
            Scenario::Copula => "copula",
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn default_dof() -> u32 {
    4
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_mu0() -> f64 {
    DEFAULT_MU0
}

/// One Monte Carlo campaign. `null` entries in `snr_db_list` mean noiseless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n_sources: usize,
    /// Payload samples per source; injected vertices come on top.
    pub n_samples: usize,
    pub snr_db_list: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_probabilities: Option<Vec<f64>>,
    /// Defaults to on for pam4 and copula, off for images.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_extremes: Option<bool>,
    #[serde(default = "default_dof")]
    pub dof: u32,
    pub methods: Vec<Criterion>,
    pub n_trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_mu0")]
    pub mu0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub image_paths: Vec<PathBuf>,
}

impl ExperimentConfig {
    /// Minimal config for `scenario`; callers adjust fields from here.
    pub fn new(scenario: Scenario, n_sources: usize, n_samples: usize) -> Self {
        Self {
            scenario,
            n_sources,
            n_samples,
            snr_db_list: vec![None],
            rho_list: (scenario == Scenario::Copula).then(|| vec![0.0]),
            symbol_probabilities: None,
            inject_extremes: None,
            dof: default_dof(),
            methods: vec![Criterion::Linf],
            n_trials: 1,
            master_seed: 0,
            max_iter: default_max_iter(),
            mu0: default_mu0(),
            output: None,
            image_paths: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Reads and validates a config. Relative image paths resolve against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let mut config = Self::from_json(&text).map_err(|source| BenchError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if let Some(dir) = path.parent() {
            for p in &mut config.image_paths {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn injects(&self) -> bool {
        self.inject_extremes
            .unwrap_or(self.scenario != Scenario::Images)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.symbol_probabilities
            .clone()
            .unwrap_or_else(|| PAM4_UNIFORM.to_vec())
    }

    /// Correlation levels to sweep; a single `None` outside the copula scenario.
    pub fn rho_values(&self) -> Vec<Option<f64>> {
        match (&self.rho_list, self.scenario) {
            (Some(list), Scenario::Copula) => list.iter().copied().map(Some).collect(),
            _ => vec![None],
        }
    }

    pub fn cells_per_trial(&self) -> usize {
        self.rho_values().len() * self.snr_db_list.len() * self.methods.len()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(BenchError::Config(m));
        if self.n_sources < 2 {
            return fail(format!(
                "n_sources must be at least 2, got {}",
                self.n_sources
            ));
        }
        if self.n_samples < 2 {
            return fail(format!(
                "n_samples must be at least 2, got {}",
                self.n_samples
            ));
        }
        if self.n_trials == 0 {
            return fail("n_trials must be at least 1".into());
        }
        if self.snr_db_list.is_empty() {
            return fail("snr_db_list is empty".into());
        }
        if let Some(bad) = self.snr_db_list.iter().flatten().find(|v| !v.is_finite()) {
            return fail(format!("SNR {bad} is not finite; use null for noiseless"));
        }
        if self.methods.is_empty() {
            return fail("methods is empty".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return fail(format!("method {m} listed twice"));
            }
        }
        if self.max_iter == 0 || !(self.mu0 > 0.0 && self.mu0 < std::f64::consts::PI) {
            return fail("optimizer needs max_iter ≥ 1 and 0 < mu0 < π".into());
        }
        if self.injects() && self.n_sources > MAX_VERTEX_DIM {
            return fail(format!(
                "cannot inject 2^{} vertices (limit {MAX_VERTEX_DIM} sources)",
                self.n_sources
            ));
        }
        match self.scenario {
            Scenario::Copula => match &self.rho_list {
                None => return fail("copula scenario needs rho_list".into()),
                Some(list) if list.is_empty() => return fail("rho_list is empty".into()),
                Some(list) => {
                    if let Some(r) = list.iter().find(|r| !(0.0..1.0).contains(*r)) {
                        return fail(format!("rho {r} outside [0, 1)"));
                    }
                    if self.dof == 0 {
                        return fail("dof must be at least 1".into());
                    }
                }
            },
            _ if self.rho_list.is_some() => {
                return fail("rho_list only applies to the copula scenario".into())
            }
            _ => {}
        }
        if self.symbol_probabilities.is_some() && self.scenario != Scenario::Pam4 {
            return fail("symbol_probabilities only applies to the pam4 scenario".into());
        }
        match self.scenario {
            Scenario::Images if self.image_paths.len() != self.n_sources => fail(format!(
                "images scenario needs one image per source ({} paths for {} sources)",
                self.image_paths.len(),
                self.n_sources
            )),
            Scenario::Images => Ok(()),
            _ if !self.image_paths.is_empty() => {
                fail("image_paths only applies to the images scenario".into())
            }
            _ => Ok(()),
        }
    }
}
