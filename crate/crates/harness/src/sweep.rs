//! Monte Carlo sweeps over algorithms, budgets and trials, and their CSV output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crowdlabel::inference::{Algorithm, PipelineResult, Trial};
use crowdlabel::Seed;

use crate::config::{ConfigError, ExperimentConfig};

pub const CSV_HEADER: [&str; 8] =
    ["algorithm", "budget_queries_per_task", "trial", "error_fraction", "clustering_ok", "p_hat", "q_hat", "seed"];

/// Columns after the fixed header.
pub const CSV_EXTRA: [&str; 5] = ["realized_queries_per_task", "stage2_queries_per_task", "r", "l", "error"];

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub error_fraction: f64,
    pub queries_per_task: f64,
    pub stage2_queries_per_task: f64,
    pub clustering_ok: Option<bool>,
    pub p_hat: Option<f64>,
    pub q_hat: Option<f64>,
}

impl From<&PipelineResult<f64>> for Measurement {
    fn from(r: &PipelineResult<f64>) -> Self {
        Measurement {
            error_fraction: r.error_fraction,
            queries_per_task: r.queries_per_task,
            stage2_queries_per_task: r.stage2_queries_per_task,
            clustering_ok: r.clustering_ok,
            p_hat: r.estimates.as_ref().map(|e| e.p_hat),
            q_hat: r.estimates.as_ref().map(|e| e.q_hat),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    /// Per-cluster stage-two queries.
    pub l: usize,
    /// Nominal stage-two queries per task, `l * d`.
    pub budget: usize,
    pub r: usize,
    pub trial: usize,
    pub seed: u64,
    /// Stage failures are kept as messages so the sweep can continue.
    pub outcome: Result<Measurement, String>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSummary {
    pub mean_error: f64,
    /// Standard error of the mean over successful trials.
    pub std_error: f64,
    pub mean_queries_per_task: f64,
    pub ok_trials: usize,
    pub failed_trials: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Summary per `(algorithm, l)`.
    pub fn summary(&self) -> BTreeMap<(Algorithm, usize), GroupSummary> {
        let mut groups: BTreeMap<(Algorithm, usize), Vec<&SweepRow>> = BTreeMap::new();
        for row in &self.rows {
            groups.entry((row.algorithm, row.l)).or_default().push(row);
        }
        groups
            .into_iter()
            .map(|(key, rows)| {
                let ok: Vec<&Measurement> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
                let errs: Vec<f64> = ok.iter().map(|m| m.error_fraction).collect();
                let (mean_error, std_error) = mean_and_std_error(&errs);
                let qpt = ok.iter().map(|m| m.queries_per_task).sum::<f64>() / ok.len().max(1) as f64;
                let summary = GroupSummary {
                    mean_error,
                    std_error,
                    mean_queries_per_task: qpt,
                    ok_trials: ok.len(),
                    failed_trials: rows.len() - ok.len(),
                };
                (key, summary)
            })
            .collect()
    }
}

/// Sample mean and standard error (`s / sqrt(k)`); NaN mean for no data.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let k = xs.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

/// Seed for trial `trial` at budget `l`. Each `(l, trial)` pair gets its own world.
pub fn trial_seed(base: Seed, l: usize, trial: usize) -> Seed {
    base.derive_named(&format!("l={l}")).derive(trial as u64)
}

/// Runs every configured algorithm on a fresh world per `(budget, trial)`.
/// Algorithms at the same `(budget, trial)` share the world and the stage-one
/// answers. Rows come back ordered by algorithm (config order), budget
/// (config order) and trial, whatever order the trials finish in.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepTable, ConfigError> {
    cfg.validate()?;
    let params = cfg.params()?;
    let pipelines = cfg.budgets.iter().map(|&l| cfg.pipeline(l)).collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, usize)> =
        (0..cfg.budgets.len()).flat_map(|b| (0..cfg.trials).map(move |t| (b, t))).collect();

    let mut per_job: Vec<((usize, usize), Vec<SweepRow>)> = jobs
        .par_iter()
        .map(|&(b, t)| {
            let l = cfg.budgets[b];
            let pipe = &pipelines[b];
            let seed = trial_seed(cfg.base_seed(), l, t);
            let trial = Trial::sample(&params, cfg.m, cfg.n, pipe.r, seed);
            let rows = cfg
                .algorithms
                .iter()
                .map(|&algorithm| {
                    let start = Instant::now();
                    let outcome = match &trial {
                        Ok(trial) => trial.run(algorithm, pipe).map(|r| Measurement::from(&r)),
                        Err(e) => Err(e.clone()),
                    };
                    SweepRow {
                        algorithm,
                        l,
                        budget: l * cfg.d,
                        r: pipe.r,
                        trial: t,
                        seed: seed.value(),
                        outcome: outcome.map_err(|e| e.to_string()),
                        wall_time: start.elapsed(),
                    }
                })
                .collect();
            ((b, t), rows)
        })
        .collect();
    per_job.sort_by_key(|(k, _)| *k);

    let mut rows: Vec<SweepRow> = per_job.into_iter().flat_map(|(_, rows)| rows).collect();
    let alg_rank = |a: Algorithm| cfg.algorithms.iter().position(|&x| x == a).unwrap_or(usize::MAX);
    let budget_rank = |l: usize| cfg.budgets.iter().position(|&x| x == l).unwrap_or(usize::MAX);
    rows.sort_by_key(|r| (alg_rank(r.algorithm), budget_rank(r.l), r.trial));
    Ok(SweepTable { rows })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the table as CSV. Wall times are left out so identical configs give
/// identical files.
pub fn write_csv<W: Write>(table: &SweepTable, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.iter().chain(CSV_EXTRA.iter()))?;
    for row in &table.rows {
        let (m, err) = match &row.outcome {
            Ok(m) => (Some(m), String::new()),
            Err(e) => (None, e.clone()),
        };
        w.write_record([
            row.algorithm.name().to_string(),
            row.budget.to_string(),
            row.trial.to_string(),
            opt(m.map(|m| m.error_fraction)),
            opt(m.and_then(|m| m.clustering_ok)),
            opt(m.and_then(|m| m.p_hat)),
            opt(m.and_then(|m| m.q_hat)),
            row.seed.to_string(),
            opt(m.map(|m| m.queries_per_task)),
            opt(m.map(|m| m.stage2_queries_per_task)),
            row.r.to_string(),
            row.l.to_string(),
            err,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(table: &SweepTable, path: &Path) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(table, std::io::BufWriter::new(file)).map_err(std::io::Error::other)
}
