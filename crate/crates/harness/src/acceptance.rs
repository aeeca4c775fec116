//! Acceptance suite: one check per published property, each returning a
//! [`CriterionReport`] with the measured numbers.
//!
//! [`Effort::Full`] uses 30 trials everywhere. [`Effort::Quick`] uses 10 trials
//! (and fewer tasks where that dominates the cost); its verdicts are indicative only.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crowdlabel::budgets::{budget_report, stage1_recommendation, theoretical_error_bounds};
use crowdlabel::cluster::sdp::{
    cluster_workers_sdp, solve_sdp, top_two_eigenvalues, DensityConstants, SdpConfig,
};
use crowdlabel::cluster::{cluster_sequential, StageOneBlock};
use crowdlabel::inference::{
    estimate_pq, infer_oracle, split_workers, type_match, Algorithm, PipelineConfig, StageOneMethod, Trial,
};
use crowdlabel::linalg::{jacobi_eigen, JacobiConfig, SymMatrix};
use crowdlabel::model::{assign_per_cluster, assign_uniform, sample_answers, sample_world};
use crowdlabel::voting::{hoeffding_bound, WeightVector};
use crowdlabel::{Clustering, ModelParams64, Seed, Stream};

use crate::config::ExperimentConfig;
use crate::sweep::run_sweep;

/// Base seed of the acceptance suite.
pub const ACCEPTANCE_SEED: Seed = Seed(20_240_531);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effort {
    Full,
    Quick,
}

impl Effort {
    fn trials(self) -> usize {
        match self {
            Effort::Full => 30,
            Effort::Quick => 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {} [{verdict}] {}: {}", self.id, self.name, self.detail)
    }
}

fn report(id: u8, name: &'static str, passed: bool, detail: String) -> CriterionReport {
    CriterionReport { id, name, passed, detail }
}

fn params(d: usize, p: f64, q: f64) -> ModelParams64 {
    ModelParams64::new(d, p, q).expect("valid acceptance parameters")
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

/// Budget formulas: orderings on the parameter grid and the hand-derived spot values.
pub fn criterion_1() -> CriterionReport {
    let mut points = 0;
    let mut oracle_viol = Vec::new();
    let mut alg1_viol = Vec::new();
    for &p in &[0.7, 0.8, 0.9, 1.0] {
        for &q in &[0.5, 0.55, 0.6, 0.7] {
            if q >= p {
                continue;
            }
            for &d in &[2usize, 3, 5, 10] {
                for &a in &[0.01, 0.1] {
                    points += 1;
                    let r = budget_report(&params(d, p, q), a).expect("grid point");
                    if r.l_oracle > r.l_mv {
                        oracle_viol.push(format!("(p={p},q={q},d={d},a={a})"));
                    }
                    if r.l_alg1 > r.l_type {
                        alg1_viol.push(format!("(p={p},q={q},d={d},a={a}: {:.2} > {:.2})", r.l_alg1, r.l_type));
                    }
                }
            }
        }
    }
    let spot = budget_report(&params(3, 0.9, 0.6), 0.1).expect("spot point");
    // hand values: 0.1296/1.44, 6 ln10 / 0.72, 18 ln10 / 1.44
    let ln10 = 10f64.ln();
    let spot_ok = rel_close(spot.gamma_u, 0.09, 1e-6)
        && rel_close(spot.l_oracle, 6.0 * ln10 / 0.72, 1e-6)
        && rel_close(spot.l_mv, 18.0 * ln10 / 1.44, 1e-6);
    let passed = oracle_viol.is_empty() && alg1_viol.is_empty() && spot_ok;
    let shown: Vec<&String> = alg1_viol.iter().take(3).collect();
    let detail = format!(
        "{points} grid points; L_oracle>L_mv at {}; L_Alg1>L_type at {} {:?}{}; spot gamma_u={:.6} L_oracle={:.4} L_mv={:.4} ({})",
        oracle_viol.len(),
        alg1_viol.len(),
        shown,
        if alg1_viol.len() > 3 { " ..." } else { "" },
        spot.gamma_u,
        spot.l_oracle,
        spot.l_mv,
        if spot_ok { "match" } else { "MISMATCH" },
    );
    report(1, "budget formula grid", passed, detail)
}

/// With `q = 1/2`, alg1 and the prior algorithm label every task identically.
pub fn criterion_2(effort: Effort) -> CriterionReport {
    let trials = effort.trials();
    let mut mismatches = 0usize;
    let mut compared = 0usize;
    let mut failures = Vec::new();
    for &p in &[0.85, 0.9] {
        let prm = params(3, p, 0.5);
        let cfg = PipelineConfig { r: 200, l: 4, ..PipelineConfig::recommended(&prm, 0.1, 60).expect("rec") };
        let results: Vec<_> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let seed = ACCEPTANCE_SEED.derive_named(&format!("c2 p={p}")).derive(t as u64);
                let trial = Trial::sample(&prm, 1000, 60, cfg.r, seed)?;
                let a = trial.run(Algorithm::Prior, &cfg)?;
                let b = trial.run(Algorithm::Alg1, &cfg)?;
                Ok::<_, crowdlabel::Error>((a.predictions, b.predictions))
            })
            .collect();
        for r in results {
            match r {
                Ok((a, b)) => {
                    compared += a.len();
                    mismatches += a.iter().zip(&b).filter(|(x, y)| x != y).count();
                }
                Err(e) => failures.push(e.to_string()),
            }
        }
    }
    let passed = mismatches == 0 && failures.is_empty() && compared > 0;
    let detail = format!("{compared} task labels compared, {mismatches} differ, {} failed trials", failures.len());
    report(2, "q=1/2 collapse of Alg 1 onto the prior algorithm", passed, detail)
}

/// Sweep configuration behind criterion 3.
pub fn criterion_3_config(effort: Effort) -> ExperimentConfig {
    ExperimentConfig {
        d: 3,
        p: 0.9,
        q: 0.7,
        m: 2000,
        n: 60,
        budgets: vec![1, 3, 6, 10, 15, 20],
        algorithms: Algorithm::ALL.to_vec(),
        trials: effort.trials(),
        r: Some(300),
        stage_one: StageOneMethod::Sdp,
        seed: ACCEPTANCE_SEED.derive_named("c3").value(),
        ..ExperimentConfig::default()
    }
}

/// Qualitative comparison at `q = 0.7`: oracle <= alg1 <= prior, alg1 <= mv,
/// |alg2 - alg1| <= 0.02 at every budget.
pub fn criterion_3(effort: Effort) -> CriterionReport {
    let cfg = criterion_3_config(effort);
    let table = match run_sweep(&cfg) {
        Ok(t) => t,
        Err(e) => return report(3, "q=0.7 algorithm ordering", false, e.to_string()),
    };
    let summary = table.summary();
    let mut passed = true;
    let mut parts = Vec::new();
    for &l in &cfg.budgets {
        let g = |a: Algorithm| summary[&(a, l)];
        let (mv, or, pr, a1, a2) =
            (g(Algorithm::Mv), g(Algorithm::OracleWmv), g(Algorithm::Prior), g(Algorithm::Alg1), g(Algorithm::Alg2));
        let failed = [mv, or, pr, a1, a2].iter().any(|s| s.failed_trials > 0);
        // "a <= b within 3 standard errors" uses the standard error of the difference
        let le = |a: crate::sweep::GroupSummary, b: crate::sweep::GroupSummary| {
            a.mean_error <= b.mean_error + 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
        };
        let ok = !failed && le(or, a1) && le(a1, pr) && le(a1, mv) && (a2.mean_error - a1.mean_error).abs() <= 0.02;
        passed &= ok;
        parts.push(format!(
            "qpt={:.1}{} mv={:.4} oracle={:.4} prior={:.4} alg1={:.4} alg2={:.4}{}",
            a1.mean_queries_per_task,
            if ok { "" } else { " !" },
            mv.mean_error,
            or.mean_error,
            pr.mean_error,
            a1.mean_error,
            a2.mean_error,
            if failed { " (stage failures)" } else { "" },
        ));
    }
    report(3, "q=0.7 algorithm ordering", passed, parts.join("; "))
}

/// alg1 with the recommended stage-one settings keeps the error fraction
/// under `alpha_c` in at least 27 of 30 trials.
pub fn criterion_4(effort: Effort) -> CriterionReport {
    let prm = params(3, 0.9, 0.6);
    let alpha = 0.1;
    let n = stage1_recommendation(&prm, alpha, 2).expect("rec").n_min;
    let cfg = PipelineConfig::recommended(&prm, alpha, n).expect("rec");
    let m = cfg.r + 2500;
    let trials = effort.trials();
    let errors: Vec<Result<f64, String>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = ACCEPTANCE_SEED.derive_named("c4").derive(t as u64);
            Trial::sample(&prm, m, n, cfg.r, seed)
                .and_then(|trial| trial.run(Algorithm::Alg1, &cfg))
                .map(|r| r.error_fraction)
                .map_err(|e| e.to_string())
        })
        .collect();
    let good = errors.iter().filter(|e| matches!(e, Ok(x) if *x <= alpha)).count();
    let worst = errors.iter().filter_map(|e| e.as_ref().ok()).fold(0.0f64, |a, &b| a.max(b));
    let need = (trials * 9).div_ceil(10);
    let detail = format!(
        "n={n} r={} l={} zeta={:.4} m={m}: {good}/{trials} trials with error <= {alpha} (worst {worst:.4})",
        cfg.r, cfg.l, cfg.zeta
    );
    report(4, "recommended settings end to end", good >= need, detail)
}

/// Empirical clustering-failure and type-mismatch rates against their bounds.
pub fn criterion_5(effort: Effort) -> CriterionReport {
    let prm = params(3, 0.9, 0.6);
    let n = 30;
    let trials = effort.trials();
    let tasks_per_trial = match effort {
        Effort::Full => 400,
        Effort::Quick => 100,
    };
    let grid = [(1500, 20), (2500, 50), (3500, 80), (4500, 110), (5500, 150), (6500, 200)];
    let zeta = stage1_recommendation(&prm, 0.1, n).expect("rec").zeta;
    let mut passed = true;
    let mut parts = Vec::new();
    for &(r, l) in &grid {
        let bounds = theoretical_error_bounds(&prm, r, l, n).expect("bounds").clipped();
        let outcomes: Vec<(bool, usize)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let seed = ACCEPTANCE_SEED.derive_named(&format!("c5 r={r} l={l}")).derive(t as u64);
                let world = sample_world(&prm, r, n, seed).expect("world");
                let stage_one: Vec<usize> = (0..r).collect();
                let plan = assign_uniform(n, &stage_one, n, seed).expect("plan");
                let ans = sample_answers(&world, &prm, &plan, seed).expect("answers");
                let block = StageOneBlock::from_answers(&ans, &stage_one).expect("block");
                let clustered = cluster_sequential(&block, zeta).expect("cluster");
                let cluster_fail = !clustered.same_partition(&world.worker_types);

                // type matching is judged on the true partition of a separate,
                // larger crowd so every type has at least l workers
                let seed2 = seed.derive_named("type match");
                let world = sample_world(&prm, tasks_per_trial, 9 * l, seed2).expect("world");
                let truth = Clustering::from_assignments(&world.worker_types).expect("truth");
                let tasks: Vec<usize> = (0..tasks_per_trial).collect();
                let plan2 = assign_per_cluster(&truth, &tasks, l, seed2).expect("plan2");
                let ans2 = sample_answers(&world, &prm, &plan2, seed2).expect("answers2");
                let type_of_cluster: Vec<usize> =
                    truth.clusters().iter().map(|c| world.worker_types[c[0]]).collect();
                let mismatches = tasks
                    .iter()
                    .filter(|&&i| {
                        type_match(&ans2, &truth, i).map_or(true, |z| type_of_cluster[z] != world.task_types[i])
                    })
                    .count();
                (cluster_fail, mismatches)
            })
            .collect();
        let cluster_rate = outcomes.iter().filter(|o| o.0).count() as f64 / trials as f64;
        let samples = (trials * tasks_per_trial) as f64;
        let match_rate = outcomes.iter().map(|o| o.1).sum::<usize>() as f64 / samples;
        let sigma = |b: f64, k: f64| (b * (1.0 - b) / k).sqrt();
        let c_ok = cluster_rate <= bounds.clustering + 3.0 * sigma(bounds.clustering, trials as f64);
        let t_ok = match_rate <= bounds.type_match + 3.0 * sigma(bounds.type_match, samples);
        passed &= c_ok && t_ok;
        parts.push(format!(
            "(r={r},l={l}) cluster {cluster_rate:.3}<={:.3e}{} match {match_rate:.2e}<={:.2e}{}",
            bounds.clustering,
            if c_ok { "" } else { " !" },
            bounds.type_match,
            if t_ok { "" } else { " !" },
        ));
    }
    report(5, "clustering and type-match bounds", passed, parts.join("; "))
}

/// SDP exact-recovery rate and placement of the data-driven tuning parameter.
pub fn criterion_6(effort: Effort) -> CriterionReport {
    let prm = params(3, 0.9, 0.6);
    let n = 60;
    let dens = DensityConstants::new(&prm);
    let r = dens.recovery_tasks(3, n, 1.0).ceil() as usize;
    let (lo, hi) = dens.tuning_window(r);
    let trials = effort.trials();
    let outcomes: Vec<Result<(bool, bool), String>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = ACCEPTANCE_SEED.derive_named("c6").derive(t as u64);
            let world = sample_world(&prm, r, n, seed).map_err(|e| e.to_string())?;
            let tasks: Vec<usize> = (0..r).collect();
            let plan = assign_uniform(n, &tasks, n, seed).map_err(|e| e.to_string())?;
            let ans = sample_answers(&world, &prm, &plan, seed).map_err(|e| e.to_string())?;
            let block = StageOneBlock::from_answers(&ans, &tasks).map_err(|e| e.to_string())?;
            let out = cluster_workers_sdp::<f64>(&block, 3, seed, &SdpConfig::default()).map_err(|e| e.to_string())?;
            let lam = out.estimates.lambda_tune;
            Ok((out.clustering.same_partition(&world.worker_types), lam >= lo && lam <= hi))
        })
        .collect();
    let ok: Vec<&(bool, bool)> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let exact = ok.iter().filter(|o| o.0).count();
    let inside = ok.iter().filter(|o| o.1).count();
    let target = 1.0 - 4.0 / n as f64;
    let sigma = (target * (1.0 - target) / trials as f64).sqrt();
    let rate = exact as f64 / trials as f64;
    let need_inside = trials - trials.div_ceil(15);
    let passed = ok.len() == trials && rate >= target - 3.0 * sigma && inside >= need_inside;
    let detail = format!(
        "r={r}: exact recovery {exact}/{trials} (need rate >= {:.3}); lambda in [{lo:.1}, {hi:.1}] {inside}/{trials} (need {need_inside})",
        target - 3.0 * sigma
    );
    report(6, "SDP recovery rate and tuning window", passed, detail)
}

/// Solver unit checks: noiseless two-block instance and the eigensolver against
/// a dense reference.
pub fn criterion_7() -> CriterionReport {
    let a = SymMatrix::from_fn(6, |i, j| {
        if i == j {
            0.0
        } else if (i < 3) == (j < 3) {
            20.0
        } else {
            -20.0
        }
    });
    let truth = SymMatrix::from_fn(6, |i, j| if (i < 3) == (j < 3) { 1.0 } else { 0.0 });
    let dist = solve_sdp(&a, 0.0, &SdpConfig::default()).map(|s| s.x.distance(&truth));

    let mut rng = ACCEPTANCE_SEED.derive_named("c7").rng(Stream::Selection);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let n = 2 + k % 29;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        let m = SymMatrix::from_row_major(n, data.clone()).expect("square");
        let ours = jacobi_eigen(&m, &JacobiConfig::default()).expect("converges").sorted_values();
        let mut reference: Vec<f64> =
            DMatrix::from_row_slice(n, n, &data).symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|a, b| b.total_cmp(a));
        let scale = reference.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for (x, y) in ours.iter().zip(&reference) {
            worst = worst.max((x - y).abs() / scale);
        }
        let (l1, l2) = top_two_eigenvalues(&m, &JacobiConfig::default()).expect("n >= 2");
        worst = worst.max((l1 - reference[0]).abs() / scale).max((l2 - reference[1]).abs() / scale);
    }
    let block_ok = matches!(dist, Ok(d) if d <= 1e-3);
    let detail = format!(
        "two-block Frobenius distance {}; eigenvalue max relative deviation {worst:.2e} over 50 matrices",
        match &dist {
            Ok(d) => format!("{d:.2e}"),
            Err(e) => e.to_string(),
        }
    );
    report(7, "SDP solver and eigensolver", block_ok && worst <= 1e-6, detail)
}

/// Reliability estimates under a perfect clustering.
pub fn criterion_8(effort: Effort) -> CriterionReport {
    let prm = params(3, 0.9, 0.6);
    let (m, n, l, beta) = (5000, 60, 10, 0.3);
    let trials = effort.trials();
    let est: Vec<Result<(f64, f64), String>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = ACCEPTANCE_SEED.derive_named("c8").derive(t as u64);
            let world = sample_world(&prm, m, n, seed).map_err(|e| e.to_string())?;
            let truth = Clustering::from_assignments(&world.worker_types).map_err(|e| e.to_string())?;
            let tasks: Vec<usize> = (0..m).collect();
            let plan = assign_per_cluster(&truth, &tasks, l, seed).map_err(|e| e.to_string())?;
            let ans = sample_answers(&world, &prm, &plan, seed).map_err(|e| e.to_string())?;
            let split = split_workers(&truth, beta, seed).map_err(|e| e.to_string())?;
            let e = estimate_pq::<f64>(&ans, &truth, &split, &tasks).map_err(|e| e.to_string())?;
            Ok((e.p_hat, e.q_hat))
        })
        .collect();
    let ok: Vec<(f64, f64)> = est.iter().filter_map(|e| e.as_ref().ok().copied()).collect();
    let good = ok.iter().filter(|(p, q)| (p - 0.9).abs() <= 0.03 && (q - 0.6).abs() <= 0.03).count();
    let mean_p = ok.iter().map(|e| e.0).sum::<f64>() / ok.len().max(1) as f64;
    let mean_q = ok.iter().map(|e| e.1).sum::<f64>() / ok.len().max(1) as f64;
    let need = (trials * 9).div_ceil(10);
    let detail = format!(
        "{good}/{trials} trials within 0.03 (need {need}); mean p_hat={mean_p:.4} q_hat={mean_q:.4}; {} failed",
        trials - ok.len()
    );
    report(8, "estimator consistency", good >= need, detail)
}

/// Oracle weighted voting against the mean per-task Hoeffding bound.
pub fn criterion_9(effort: Effort) -> CriterionReport {
    let prm = params(3, 0.9, 0.6);
    let (m, n) = (2000, 60);
    let trials = effort.trials();
    let mut passed = true;
    let mut parts = Vec::new();
    for &k in &[3usize, 6, 12, 24, 36, 60] {
        let per_trial: Vec<(usize, f64)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let seed = ACCEPTANCE_SEED.derive_named(&format!("c9 k={k}")).derive(t as u64);
                let world = sample_world(&prm, m, n, seed).expect("world");
                let tasks: Vec<usize> = (0..m).collect();
                let plan = assign_uniform(n, &tasks, k, seed).expect("plan");
                let ans = sample_answers(&world, &prm, &plan, seed).expect("answers");
                let mut errors = 0;
                let mut bound = 0.0;
                for i in 0..m {
                    let out = infer_oracle(&ans, &world, &prm, i, seed.derive(i as u64)).expect("votes");
                    if out.label != world.labels[i] {
                        errors += 1;
                    }
                    let fids: Vec<f64> = ans
                        .task_answers(i)
                        .iter()
                        .map(|&(j, _)| prm.fidelity(world.task_types[i], world.worker_types[j]))
                        .collect();
                    let w: Vec<f64> = fids.iter().map(|f| 2.0 * f - 1.0).collect();
                    bound += WeightVector::new(w).and_then(|w| hoeffding_bound(&fids, &w)).unwrap_or(1.0);
                }
                (errors, bound)
            })
            .collect();
        let samples = (trials * m) as f64;
        let rate = per_trial.iter().map(|x| x.0).sum::<usize>() as f64 / samples;
        let b = per_trial.iter().map(|x| x.1).sum::<f64>() / samples;
        let sigma = (b * (1.0 - b) / samples).sqrt();
        let ok = rate <= b + 3.0 * sigma;
        passed &= ok;
        parts.push(format!("K={k}: {rate:.4}<={b:.4}{}", if ok { "" } else { " !" }));
    }
    report(9, "oracle WMV Hoeffding conformance", passed, parts.join("; "))
}

/// Every criterion in order.
pub fn run_all(effort: Effort) -> Vec<CriterionReport> {
    vec![
        criterion_1(),
        criterion_2(effort),
        criterion_3(effort),
        criterion_4(effort),
        criterion_5(effort),
        criterion_6(effort),
        criterion_7(),
        criterion_8(effort),
        criterion_9(effort),
    ]
}
