//! Monte Carlo harness around `bca-core`: campaign configs, trial execution,
//! PGM and matrix file formats, and CSV/JSON reports.

pub mod campaign;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;

pub use campaign::{run_campaign, Aggregate, ExperimentReport, TrialFailure, TrialLog};
pub use config::{ExperimentConfig, Scenario};
pub use error::{BenchError, Result};

/// Small built-in campaigns for `bca demo`. Images need user files, so there is none for them.
pub fn demo_config(scenario: Scenario) -> Option<ExperimentConfig> {
    let mut c = ExperimentConfig::new(scenario, 2, 1000);
    c.methods = vec![bca_core::Criterion::Linf, bca_core::Criterion::Vm];
    c.n_trials = 5;
    c.master_seed = 2024;
    match scenario {
        Scenario::Pam4 => Some(c),
        Scenario::Copula => {
            c.snr_db_list = vec![Some(30.0)];
            c.rho_list = Some(vec![0.0, 0.5, 0.9]);
            Some(c)
        }
        Scenario::Images => None,
    }
}
