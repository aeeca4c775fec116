use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use crowdlabel::budgets::{budget_report, stage1_recommendation, theoretical_error_bounds};
use crowdlabel::cluster::sdp::{cluster_workers_sdp, DensityConstants};
use crowdlabel::cluster::{cluster_sequential, StageOneBlock};
use crowdlabel::inference::StageOneMethod;
use crowdlabel::model::{assign_uniform, sample_answers, sample_world};
use crowdlabel::{ModelParams64, Seed};
use crowdlabel_harness::acceptance::{run_all, Effort};
use crowdlabel_harness::{emit_csv, run_sweep, ExperimentConfig};

#[derive(Parser)]
#[command(name = "crowdlabel", version, about = "Crowdsourced labeling under the d-type specialization model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print query budgets, error exponents and stage-one recommendations.
    Bounds(BoundsArgs),
    /// Run stage one only and report how well the clustering matches the truth.
    Cluster(ClusterArgs),
    /// Run a Monte Carlo sweep and write one CSV row per trial.
    Sweep(SweepArgs),
    /// Run the acceptance suite.
    Validate {
        /// Fewer trials and smaller instances.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Number of workers, for the stage-one recommendation.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Stage-one tasks answered by every worker.
    #[arg(long)]
    r: usize,
    #[arg(long, default_value = "threshold")]
    method: StageOneMethod,
    /// Threshold; defaults to the recommended midpoint.
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated per-cluster stage-two query counts.
    #[arg(long)]
    budgets: Option<String>,
    /// Comma-separated subset of mv,oracle_wmv,prior,alg1,alg2.
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
    /// threshold or sdp, for prior and alg1.
    #[arg(long = "stage-one")]
    stage_one: Option<String>,
    #[arg(long = "sdp-penalty")]
    sdp_penalty: Option<String>,
    #[arg(long = "sdp-tol")]
    sdp_tol: Option<String>,
    #[arg(long = "sdp-max-iter")]
    sdp_max_iter: Option<String>,
    #[arg(long = "jacobi-tol")]
    jacobi_tol: Option<String>,
    /// Output CSV; defaults to sweep.csv under $CROWDLABEL_OUT_DIR.
    #[arg(long)]
    out: Option<String>,
}

impl SweepArgs {
    fn to_config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                ExperimentConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("d", &self.d),
            ("p", &self.p),
            ("q", &self.q),
            ("m", &self.m),
            ("n", &self.n),
            ("budgets", &self.budgets),
            ("algorithms", &self.algorithms),
            ("trials", &self.trials),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("r", &self.r),
            ("zeta", &self.zeta),
            ("stage-one", &self.stage_one),
            ("sdp-penalty", &self.sdp_penalty),
            ("sdp-tol", &self.sdp_tol),
            ("sdp-max-iter", &self.sdp_max_iter),
            ("jacobi-tol", &self.jacobi_tol),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.seed = self.seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn bounds(a: &BoundsArgs) -> anyhow::Result<()> {
    let params = ModelParams64::new(a.d, a.p, a.q)?;
    let r = budget_report(&params, a.alpha)?;
    let mut rows = vec![
        ("gamma_oracle", r.gamma_oracle),
        ("gamma_mv", r.gamma_mv),
        ("gamma_u", r.gamma_u),
        ("gamma_m", r.gamma_m),
        ("L_oracle", r.l_oracle),
        ("L_mv", r.l_mv),
        ("L_type", r.l_type),
        ("L_alg1", r.l_alg1),
    ];
    let dens = DensityConstants::new(&params);
    rows.push(("p_m", dens.p_m));
    rows.push(("p_u", dens.p_u));
    println!("d={} p={} q={} alpha={}", a.d, a.p, a.q, a.alpha);
    for (k, v) in &rows {
        println!("  {k:<14}{v:>14.6}");
    }
    let mut kv: Vec<String> = rows.iter().map(|(k, v)| format!("{k}={v}")).collect();
    if let Some(n) = a.n {
        let rec = stage1_recommendation(&params, a.alpha, n)?;
        let eb = theoretical_error_bounds(&params, rec.r, rec.l, n)?;
        println!("stage one (n={n})");
        println!("  {:<14}{:>14.6}", "zeta", rec.zeta);
        println!("  {:<14}{:>14}", "r", rec.r);
        println!("  {:<14}{:>14}", "l", rec.l);
        println!("  {:<14}{:>14}", "n_min", rec.n_min);
        println!("  {:<14}{:>14.6e}", "P_cluster", eb.clustering);
        println!("  {:<14}{:>14.6e}", "P_small_type", eb.small_type);
        println!("  {:<14}{:>14.6e}", "P_type_match", eb.type_match);
        kv.extend([
            format!("zeta={}", rec.zeta),
            format!("r={}", rec.r),
            format!("l={}", rec.l),
            format!("n_min={}", rec.n_min),
        ]);
    }
    println!();
    for line in kv {
        println!("{line}");
    }
    Ok(())
}

fn cluster(a: &ClusterArgs) -> anyhow::Result<()> {
    let params = ModelParams64::new(a.d, a.p, a.q)?;
    let seed = Seed(a.seed);
    let world = sample_world(&params, a.r, a.n, seed)?;
    let tasks: Vec<usize> = (0..a.r).collect();
    let plan = assign_uniform(a.n, &tasks, a.n, seed)?;
    let answers = sample_answers(&world, &params, &plan, seed)?;
    let block = StageOneBlock::from_answers(&answers, &tasks)?;
    let clustering = match a.method {
        StageOneMethod::Threshold => {
            let zeta = match a.zeta {
                Some(z) => z,
                None => stage1_recommendation(&params, a.alpha, a.n)?.zeta,
            };
            println!("method=threshold zeta={zeta}");
            cluster_sequential(&block, zeta)?
        }
        StageOneMethod::Sdp => {
            let out = cluster_workers_sdp::<f64>(&block, a.d, seed, &Default::default())?;
            let e = &out.estimates;
            println!(
                "method=sdp lambda1={} lambda2={} p_hat_c={} q_hat_c={} lambda={}",
                e.lambda1, e.lambda2, e.p_hat_c, e.q_hat_c, e.lambda_tune
            );
            let (lo, hi) = DensityConstants::new(&params).tuning_window(a.r);
            println!("lambda_window=[{lo}, {hi}]");
            if let Some(s) = &out.solution {
                println!(
                    "iterations={} converged={} primal_residual={:.3e} dual_residual={:.3e}",
                    s.iterations, s.converged, s.primal_residual, s.dual_residual
                );
            }
            out.clustering
        }
    };
    println!("clusters={}", clustering.num_clusters());
    println!("exact_recovery={}", clustering.same_partition(&world.worker_types));
    println!("adjusted_rand_index={:.6}", clustering.adjusted_rand_index(&world.worker_types));
    Ok(())
}

fn sweep(a: &SweepArgs) -> anyhow::Result<()> {
    let cfg = a.to_config()?;
    let table = run_sweep(&cfg)?;
    let path = cfg.output_path();
    emit_csv(&table, &path).with_context(|| format!("writing {}", path.display()))?;
    if !crowdlabel::budgets::asymptotic_regime(cfg.m, cfg.n) {
        eprintln!("note: m < n^3, below the asymptotic regime");
    }
    for ((alg, l), s) in table.summary() {
        eprintln!(
            "{:<11} l={:<4} qpt={:>8.2} error={:.4} +- {:.4}{}",
            alg.name(),
            l,
            s.mean_queries_per_task,
            s.mean_error,
            s.std_error,
            if s.failed_trials > 0 { format!(" ({} failed)", s.failed_trials) } else { String::new() }
        );
    }
    eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
    Ok(())
}

fn validate(quick: bool) -> anyhow::Result<bool> {
    let reports = run_all(if quick { Effort::Quick } else { Effort::Full });
    for r in &reports {
        println!("{r}");
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bounds(a) => bounds(a).map(|_| true),
        Command::Cluster(a) => cluster(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Validate { quick } => validate(*quick),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
