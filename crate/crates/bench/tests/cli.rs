use std::path::Path;
use std::process::{Command, Output};

use bca_bench::formats::{load_pgm, parse_matrix_csv, save_pgm, Image};
use bca_core::linalg::random_gaussian_matrix;
use bca_core::signal::{gen_uniform, inject_extremes, mix};
use bca_core::{Matrix, Rng};

fn bca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bca"))
        .args(args)
        .env("BCA_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_theorem_passes() {
    let o = bca(&["verify-theorem", "--n", "2", "--resolution", "10000"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["points"], 10000);
}

#[test]
fn verify_theorem_three_sources_reports_probe() {
    let o = bca(&["verify-theorem", "--n", "3", "--resolution", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let value = report["probes"][0]["value"].as_f64().unwrap();
    assert!((value - 5.0 / 3.0).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        bca(&["run", "/definitely/missing.json"]).status.code(),
        Some(1)
    );
    assert_eq!(bca(&["verify-theorem", "--n", "4"]).status.code(), Some(1));
    assert_eq!(
        bca(&["demo", "--scenario", "pam4", "--bogus"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bca(&[]).status.code(), Some(1));
    assert_eq!(bca(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    std::fs::write(
        &path,
        r#"{"scenario":"pam4","n_sources":2,"n_samples":100,"snr_db_list":[null],
            "methods":["linf"],"n_trails":1,"master_seed":0}"#,
    )
    .unwrap();
    let o = bca(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_trails"));
}

#[test]
fn demo_pam4_is_error_free() {
    let o = bca(&["demo", "--scenario", "pam4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.lines()
            .any(|l| l.starts_with("linf") && l.contains("SER 0.0")),
        "{out}"
    );
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{"scenario":"copula","n_sources":2,"n_samples":300,"snr_db_list":[30],
            "rho_list":[0.0,0.5],"methods":["linf","vm"],"n_trials":2,"master_seed":3,
            "output":"out.csv"}"#,
    )
    .unwrap();
    let csv = dir.path().join("results.csv");
    let o = bca(&[
        "run",
        config.to_str().unwrap(),
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("copula,linf,2,30,0,0,isi_db,"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), 8);
}

fn write_mixture(dir: &Path) -> (std::path::PathBuf, Matrix) {
    let mut rng = Rng::new(21);
    let s = inject_extremes(&gen_uniform(2, 400, 1.0, &mut rng).unwrap()).unwrap();
    let h = random_gaussian_matrix(2, 2, &mut rng).unwrap();
    let x = mix(&h, &s).unwrap();
    let path = dir.join("x.csv");
    bca_bench::formats::save_matrix_csv(&x, &path).unwrap();
    (path, h)
}

#[test]
fn separate_matrix_input() {
    let dir = tempfile::tempdir().unwrap();
    let (input, h) = write_mixture(dir.path());
    let sep_path = dir.path().join("w.csv");
    let o = bca(&[
        "separate",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "linf",
        "--separator",
        sep_path.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let y = parse_matrix_csv(&stdout(&o)).unwrap();
    assert_eq!(y.shape(), (2, 404));
    let w = bca_bench::formats::load_matrix_csv(&sep_path).unwrap();
    let g = w.matmul(&h).unwrap();
    assert!(bca_core::metrics::isi(&g).unwrap() < -30.0);
}

#[test]
fn separate_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "2,2\n1,2\n").unwrap();
    assert_eq!(
        bca(&["separate", "--input", bad.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    let o = bca(&[
        "separate",
        "--input",
        bad.to_str().unwrap(),
        "--method",
        "l2",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn separate_pgm_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::new(22);
    let s = gen_uniform(2, 32 * 32, 1.0, &mut rng).unwrap();
    let h = Matrix::from_rows(&[[0.6, 0.4], [0.3, -0.7]]).unwrap();
    let x = mix(&h, &s).unwrap();
    let mut inputs = Vec::new();
    for (i, row) in x.rows_iter().enumerate() {
        let img = Image::from_row(row, 32, 32).unwrap();
        let p = dir.path().join(format!("mix_{i}.pgm"));
        save_pgm(&img, &p).unwrap();
        inputs.push(p.to_str().unwrap().to_string());
    }
    let out = dir.path().join("est");
    let mut args = vec!["separate", "--input"];
    args.extend(inputs.iter().map(String::as_str));
    args.extend(["--output", out.to_str().unwrap()]);
    let o = bca(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for i in 0..2 {
        let img = load_pgm(&out.join(format!("estimate_{i}.pgm"))).unwrap();
        assert_eq!((img.width, img.height), (32, 32));
    }
}
