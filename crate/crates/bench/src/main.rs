use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bca_bench::campaign::headline_metric;
use bca_bench::formats::{
    load_matrix_csv, load_pgm, matrix_to_csv, save_matrix_csv, save_pgm, Image,
};
use bca_bench::report::{report_to_csv, write_report_csv, write_report_json};
use bca_bench::{
    demo_config, run_campaign, BenchError, ExperimentConfig, ExperimentReport, Scenario,
};
use bca_core::analysis::verify_theorem1;
use bca_core::separation::{DEFAULT_MAX_ITER, DEFAULT_MU0};
use bca_core::signal::{gen_uniform, inject_extremes};
use bca_core::{separate, Criterion, Matrix, Rng, SeparationConfig};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bca",
    version,
    about = "Bounded component analysis experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Linf,
    Vm,
}

impl From<Method> for Criterion {
    fn from(m: Method) -> Self {
        match m {
            Method::Linf => Criterion::Linf,
            Method::Vm => Criterion::Vm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoScenario {
    Pam4,
    Copula,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign described by a JSON config.
    Run {
        config: PathBuf,
        /// CSV destination; overrides the config's `output`. A JSON report is written next to it.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Separate one set of mixtures: a matrix CSV or one PGM per mixture.
    Separate {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "linf")]
        method: Method,
        /// Mixing is orthogonal: skip whitening.
        #[arg(long)]
        orthogonal: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, default_value_t = DEFAULT_MU0)]
        mu0: f64,
        /// Estimates CSV for matrix input, output directory for PGM input. Stdout if omitted (CSV only).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the full separating matrix as CSV.
        #[arg(long)]
        separator: Option<PathBuf>,
    },
    /// Exhaustively check the extraction theorem on vertex-containing uniform sources.
    VerifyTheorem {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=3))]
        n: u32,
        #[arg(long, default_value_t = 10_000)]
        resolution: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a small built-in campaign and print its summary.
    Demo {
        #[arg(long, value_enum)]
        scenario: DemoScenario,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn runtime(e: impl std::fmt::Display) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn print_summary(report: &ExperimentReport) {
    let metric = headline_metric(report.config.scenario);
    let label = match report.config.scenario {
        Scenario::Pam4 => "SER",
        Scenario::Images => "PSNR",
        Scenario::Copula => "ISI",
    };
    let mut out = std::io::stdout().lock();
    for a in report.aggregates.iter().filter(|a| a.metric == metric) {
        let snr = a.snr_db.map_or("none".to_string(), |v| format!("{v} dB"));
        let rho = a.rho.map(|r| format!("  rho {r}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<4}  SNR {snr}{rho}  {label} {:.2} (std {:.2}, n={})",
            a.method.name(),
            a.mean,
            a.std,
            a.count
        );
    }
    for f in &report.failures {
        eprintln!("trial {} failed: {}", f.trial, f.error);
    }
}

fn cmd_run(config_path: &Path, output: Option<PathBuf>) -> Result<(), Failure> {
    let config = ExperimentConfig::load(config_path).map_err(|e| Failure::Usage(e.to_string()))?;
    let report = run_campaign(&config).map_err(Failure::runtime)?;
    match output.or_else(|| config.output.clone()) {
        Some(csv) => {
            write_report_csv(&report, &csv).map_err(Failure::runtime)?;
            write_report_json(&report, &csv.with_extension("json")).map_err(Failure::runtime)?;
            print_summary(&report);
        }
        None => print!("{}", report_to_csv(&report)),
    }
    Ok(())
}

fn read_mixtures(inputs: &[PathBuf]) -> Result<(Matrix, Option<(usize, usize)>), Failure> {
    let is_pgm = |p: &PathBuf| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if inputs.iter().all(is_pgm) {
        let images: Vec<Image> = inputs
            .iter()
            .map(|p| load_pgm(p))
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::Usage(e.to_string()))?;
        let dims = (images[0].width, images[0].height);
        if images.iter().any(|i| (i.width, i.height) != dims) {
            return Err(Failure::Usage("input images differ in size".into()));
        }
        let rows: Vec<Vec<f64>> = images.into_iter().map(|i| i.pixels.into_vec()).collect();
        let x = Matrix::from_rows(&rows).map_err(Failure::runtime)?;
        Ok((x, Some(dims)))
    } else if inputs.len() == 1 {
        let x = load_matrix_csv(&inputs[0]).map_err(|e| Failure::Usage(e.to_string()))?;
        Ok((x, None))
    } else {
        Err(Failure::Usage(
            "pass one matrix CSV or one PGM file per mixture".into(),
        ))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_separate(
    inputs: &[PathBuf],
    method: Method,
    orthogonal: bool,
    max_iter: usize,
    mu0: f64,
    output: Option<PathBuf>,
    separator: Option<PathBuf>,
) -> Result<(), Failure> {
    let (x, dims) = read_mixtures(inputs)?;
    let config = SeparationConfig {
        criterion: method.into(),
        orthogonal_mixing: orthogonal,
        max_iter,
        mu0,
    };
    let sep = separate(&x, &config).map_err(Failure::runtime)?;
    if let Some(path) = separator {
        save_matrix_csv(&sep.separator(), &path).map_err(Failure::runtime)?;
    }
    let y = sep.estimates();
    match (dims, output) {
        (None, None) => print!("{}", matrix_to_csv(y)),
        (None, Some(path)) => save_matrix_csv(y, &path).map_err(Failure::runtime)?,
        (Some(_), None) => {
            return Err(Failure::Usage(
                "PGM input needs --output <directory>".into(),
            ))
        }
        (Some((w, h)), Some(dir)) => {
            std::fs::create_dir_all(&dir).map_err(|e| {
                Failure::runtime(BenchError::Io {
                    path: dir.clone(),
                    source: e,
                })
            })?;
            for (i, row) in y.rows_iter().enumerate() {
                let peak = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let scaled: Vec<f64> = row.iter().map(|v| v / peak).collect();
                let img = Image::from_row(&scaled, w, h).map_err(Failure::runtime)?;
                let path = dir.join(format!("estimate_{i}.pgm"));
                save_pgm(&img, &path).map_err(Failure::runtime)?;
                println!("{}", path.display());
            }
        }
    }
    eprintln!(
        "{}: final cost {:.6} after {} iterations",
        config.criterion,
        sep.outcome.final_cost(),
        sep.outcome.cost_trace.len()
    );
    Ok(())
}

fn cmd_verify(n: u32, resolution: usize, samples: usize, seed: u64) -> Result<(), Failure> {
    let base = gen_uniform(n as usize, samples, 1.0, &mut Rng::new(seed))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let s = inject_extremes(&base).map_err(Failure::runtime)?;
    let report = verify_theorem1(&s, resolution).map_err(|e| match e {
        bca_core::Error::Contract(m) => Failure::Usage(m),
        other => Failure::runtime(other),
    })?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    eprintln!(
        "theorem check passed: {} points, min {:.12}, {} equalizers",
        report.points, report.min_value, report.equalizers
    );
    Ok(())
}

fn cmd_demo(scenario: DemoScenario) -> Result<(), Failure> {
    let scenario = match scenario {
        DemoScenario::Pam4 => Scenario::Pam4,
        DemoScenario::Copula => Scenario::Copula,
    };
    let config = demo_config(scenario).expect("demo scenarios have configs");
    let report = run_campaign(&config).map_err(Failure::runtime)?;
    print_summary(&report);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run { config, output } => cmd_run(&config, output),
        Command::Separate {
            input,
            method,
            orthogonal,
            max_iter,
            mu0,
            output,
            separator,
        } => cmd_separate(&input, method, orthogonal, max_iter, mu0, output, separator),
        Command::VerifyTheorem {
            n,
            resolution,
            samples,
            seed,
        } => cmd_verify(n, resolution, samples, seed),
        Command::Demo { scenario } => cmd_demo(scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
