use bca_bench::formats::{encode_pgm, load_pgm, parse_pgm, save_pgm, Image};
use bca_bench::report::{report_from_json, report_to_csv, report_to_json, CSV_HEADER};
use bca_bench::{run_campaign, BenchError, ExperimentConfig, ExperimentReport, Scenario};
use bca_core::metrics::MetricRecord;
use bca_core::{Criterion, Rng};

fn copula_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Scenario::Copula, 2, 400);
    c.snr_db_list = vec![Some(20.0), Some(30.0)];
    c.rho_list = Some(vec![0.0, 0.5, 0.9]);
    c.methods = vec![Criterion::Linf, Criterion::Vm];
    c.n_trials = 3;
    c.master_seed = 99;
    c
}

#[test]
fn record_count_matches_config() {
    let c = copula_config();
    let report = run_campaign(&c).unwrap();
    assert_eq!(report.records.len(), c.n_trials * 2 * 3 * 2);
    assert_eq!(report.trials.len(), c.n_trials);
    for log in &report.trials {
        assert_eq!(log.cells.len(), 6);
        for cell in &log.cells {
            assert_eq!(cell.mixture_digests.len(), 2);
            assert_eq!(cell.mixture_digests[0], cell.mixture_digests[1]);
            assert!(cell.realized_correlation.is_some());
        }
    }
}

#[test]
fn aggregates_are_arithmetic_means() {
    let c = copula_config();
    let report = run_campaign(&c).unwrap();
    for a in &report.aggregates {
        let values: Vec<f64> = report
            .records
            .iter()
            .filter(|r| r.method == a.method && r.snr_db == a.snr_db && r.rho == a.rho)
            .filter_map(|r| r.isi_db)
            .collect();
        assert_eq!(values.len(), a.count);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        assert!((mean - a.mean).abs() <= 1e-12);
    }
}

#[test]
fn identical_configs_give_identical_csv() {
    let mut c = ExperimentConfig::new(Scenario::Pam4, 2, 300);
    c.snr_db_list = vec![None, Some(10.0)];
    c.methods = vec![Criterion::Linf, Criterion::Vm];
    c.n_trials = 4;
    let a = report_to_csv(&run_campaign(&c).unwrap());
    let b = report_to_csv(&run_campaign(&c).unwrap());
    assert_eq!(a, b);
    c.master_seed = 1;
    assert_ne!(a, report_to_csv(&run_campaign(&c).unwrap()));
}

#[test]
fn adding_a_method_keeps_the_data() {
    let mut c = ExperimentConfig::new(Scenario::Pam4, 2, 300);
    c.snr_db_list = vec![Some(15.0)];
    c.n_trials = 2;
    let alone = run_campaign(&c).unwrap();
    c.methods = vec![Criterion::Vm, Criterion::Linf];
    let both = run_campaign(&c).unwrap();
    for (a, b) in alone.trials.iter().zip(&both.trials) {
        assert_eq!(a.cells[0].mixture_digests[0], b.cells[0].mixture_digests[1]);
    }
    let linf: Vec<&MetricRecord> = both
        .records
        .iter()
        .filter(|r| r.method == Criterion::Linf)
        .collect();
    for (a, b) in alone.records.iter().zip(linf) {
        assert_eq!(a, b);
    }
}

#[test]
fn noiseless_pam4_end_to_end() {
    let mut c = ExperimentConfig::new(Scenario::Pam4, 2, 1000);
    c.n_trials = 20;
    let report = run_campaign(&c).unwrap();
    assert!(report.headline_mean(Criterion::Linf, None, None).unwrap() <= 0.1);
}

#[test]
fn independent_copula_separates_well() {
    let mut c = ExperimentConfig::new(Scenario::Copula, 2, 1000);
    c.snr_db_list = vec![Some(30.0)];
    c.n_trials = 20;
    let report = run_campaign(&c).unwrap();
    assert!(
        report
            .headline_mean(Criterion::Linf, Some(30.0), Some(0.0))
            .unwrap()
            <= -25.0
    );
}

#[test]
fn failing_trials_abort_the_campaign() {
    let dir = tempfile::tempdir().unwrap();
    // Two identical images: every mixture is rank deficient.
    let row: Vec<f64> = (0..64).map(|i| (i as f64 / 31.5) - 1.0).collect();
    let img = Image::from_row(&row, 8, 8).unwrap();
    let mut c = ExperimentConfig::new(Scenario::Images, 2, 64);
    for i in 0..2 {
        let p = dir.path().join(format!("{i}.pgm"));
        save_pgm(&img, &p).unwrap();
        c.image_paths.push(p);
    }
    c.n_trials = 3;
    match run_campaign(&c) {
        Err(BenchError::Campaign { failed, total, .. }) => assert_eq!((failed, total), (3, 3)),
        other => panic!("expected campaign error, got {other:?}"),
    }
}

#[test]
fn image_scenario_reports_psnr_per_source() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::new(5);
    let mut c = ExperimentConfig::new(Scenario::Images, 2, 256);
    for i in 0..2 {
        let row: Vec<f64> = (0..256).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let p = dir.path().join(format!("{i}.pgm"));
        save_pgm(&Image::from_row(&row, 16, 16).unwrap(), &p).unwrap();
        c.image_paths.push(p);
    }
    c.n_trials = 2;
    let report = run_campaign(&c).unwrap();
    let r = &report.records[0];
    assert_eq!(r.psnr_db.as_ref().unwrap().len(), 2);
    let names: Vec<String> = r.metrics().into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["psnr_db_0", "psnr_db_1"]);
    assert!(report.headline_mean(Criterion::Linf, None, None).unwrap() > 20.0);
}

fn single_record_report() -> ExperimentReport {
    let c = ExperimentConfig::new(Scenario::Pam4, 2, 100);
    ExperimentReport {
        config: c,
        records: vec![MetricRecord {
            method: Criterion::Linf,
            n_sources: 2,
            snr_db: Some(10.0),
            rho: None,
            trial: 0,
            ser_percent: Some(1.25),
            psnr_db: None,
            isi_db: None,
        }],
        aggregates: Vec::new(),
        trials: Vec::new(),
        failures: Vec::new(),
    }
}

#[test]
fn csv_layout() {
    let mut report = single_record_report();
    let text = report_to_csv(&report);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, [CSV_HEADER, "pam4,linf,2,10,,0,ser_percent,1.25"]);
    report.records.clear();
    assert_eq!(report_to_csv(&report), format!("{CSV_HEADER}\n"));
}

#[test]
fn json_round_trip() {
    let report = run_campaign(&copula_config()).unwrap();
    let text = report_to_json(&report);
    let back = report_from_json(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(report_to_json(&back), text);
    let single = single_record_report();
    assert_eq!(report_from_json(&report_to_json(&single)).unwrap(), single);
}

#[test]
fn pgm_round_trip_within_one_level() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::new(8);
    let row: Vec<f64> = (0..12 * 7).map(|_| rng.uniform_in(-1.2, 1.2)).collect();
    let img = Image::from_row(&row, 12, 7).unwrap();
    let path = dir.path().join("r.pgm");
    save_pgm(&img, &path).unwrap();
    let back = load_pgm(&path).unwrap();
    assert_eq!((back.width, back.height), (12, 7));
    for (a, b) in row.iter().zip(back.pixels.as_slice()) {
        assert!((a.clamp(-1.0, 1.0) - b).abs() <= 1.0 / 127.5 + 1e-12);
    }
}

#[test]
fn zero_image_maps_to_minus_one() {
    let mut bytes = b"P5\n4 2\n255\n".to_vec();
    bytes.extend([0u8; 8]);
    let img = parse_pgm(&bytes).unwrap();
    assert!(img.pixels.as_slice().iter().all(|&v| v == -1.0));
}

#[test]
fn large_image_is_one_row() {
    let row = vec![0.5; 512 * 512];
    let img = Image::from_row(&row, 512, 512).unwrap();
    let back = parse_pgm(&encode_pgm(&img)).unwrap();
    assert_eq!(back.pixels.shape(), (1, 262_144));
}

#[test]
fn format_errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.pgm");
    std::fs::write(&path, b"P5 4 4 255\n\x01\x02").unwrap();
    match load_pgm(&path) {
        Err(BenchError::Format { offset, .. }) => assert_eq!(offset, 13),
        other => panic!("{other:?}"),
    }
}
