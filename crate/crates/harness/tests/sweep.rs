use crowdlabel::inference::{Algorithm, StageOneMethod};
use crowdlabel_harness::sweep::CSV_HEADER;
use crowdlabel_harness::{emit_csv, run_sweep, write_csv, ExperimentConfig};

fn small() -> ExperimentConfig {
    ExperimentConfig { m: 400, n: 30, r: Some(60), trials: 3, budgets: vec![2], seed: 5, ..Default::default() }
}

fn csv_text(cfg: &ExperimentConfig) -> String {
    let mut buf = Vec::new();
    write_csv(&run_sweep(cfg).unwrap(), &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn single_trial_single_row() {
    let cfg = ExperimentConfig { trials: 1, algorithms: vec![Algorithm::Mv], ..small() };
    let table = run_sweep(&cfg).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert!(table.rows[0].outcome.is_ok());
}

#[test]
fn row_count_and_order() {
    let cfg = ExperimentConfig {
        trials: 30,
        budgets: vec![1, 2, 3],
        algorithms: vec![Algorithm::OracleWmv, Algorithm::Mv],
        ..small()
    };
    let text = csv_text(&cfg);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..CSV_HEADER.len()], CSV_HEADER);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 180);
    let keys: Vec<(String, usize, usize)> =
        rows.iter().map(|r| (r[0].to_string(), r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    assert_eq!(keys[0], ("oracle_wmv".to_string(), 3, 0));
    assert_eq!(keys[30], ("oracle_wmv".to_string(), 6, 0));
    assert_eq!(keys[90], ("mv".to_string(), 3, 0));
    assert_eq!(keys[179], ("mv".to_string(), 9, 29));
    for r in &rows {
        let e: f64 = r[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&e));
        let qpt: f64 = r[8].parse().unwrap();
        assert!(qpt > 0.0);
    }
}

#[test]
fn same_config_same_bytes() {
    let cfg = ExperimentConfig { stage_one: StageOneMethod::Sdp, ..small() };
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    emit_csv(&run_sweep(&cfg).unwrap(), &a).unwrap();
    emit_csv(&run_sweep(&cfg).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = ExperimentConfig { seed: 6, ..cfg };
    assert_ne!(csv_text(&other), String::from_utf8(std::fs::read(&a).unwrap()).unwrap());
}

#[test]
fn alg2_reports_estimates() {
    let cfg = ExperimentConfig { algorithms: vec![Algorithm::Alg2], ..small() };
    let table = run_sweep(&cfg).unwrap();
    for row in &table.rows {
        let m = row.outcome.as_ref().unwrap();
        let (p, q) = (m.p_hat.unwrap(), m.q_hat.unwrap());
        assert!(p >= q && q >= 0.5 && p <= 1.0);
        assert!(m.clustering_ok.is_some());
    }
}

#[test]
fn half_sweep_alg1_and_prior_coincide() {
    let cfg = ExperimentConfig {
        q: 0.5,
        trials: 5,
        budgets: vec![1, 3, 5],
        algorithms: vec![Algorithm::Prior, Algorithm::Alg1],
        ..small()
    };
    let s = run_sweep(&cfg).unwrap().summary();
    for &l in &cfg.budgets {
        let (a, b) = (s[&(Algorithm::Prior, l)], s[&(Algorithm::Alg1, l)]);
        let tol = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.mean_error - b.mean_error).abs() <= tol);
        assert_eq!(a.mean_error, b.mean_error);
    }
}

#[test]
fn stage_failures_are_recorded_not_fatal() {
    // l * d exceeds n for the uniform baselines
    let cfg = ExperimentConfig { budgets: vec![20], algorithms: vec![Algorithm::Mv, Algorithm::Prior], ..small() };
    let table = run_sweep(&cfg).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert!(table.rows.iter().filter(|r| r.algorithm == Algorithm::Mv).all(|r| r.outcome.is_err()));
    assert!(table.rows.iter().filter(|r| r.algorithm == Algorithm::Prior).all(|r| r.outcome.is_ok()));
    let text = csv_text(&cfg);
    assert!(text.lines().nth(1).unwrap().contains("workers"), "{text}");
}

#[test]
fn invalid_config_is_rejected() {
    assert!(run_sweep(&ExperimentConfig { budgets: vec![], ..small() }).is_err());
    assert!(run_sweep(&ExperimentConfig { trials: 0, ..small() }).is_err());
}
