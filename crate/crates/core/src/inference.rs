//! Stage-two inference: type matching, the matched-cluster majority vote, the
//! weighted vote with known `(p, q)`, and the weighted vote with `(p, q)`
//! estimated from a held-out subset of workers.
//!
//! [`Trial`] ties the stages together: it fixes a world and the stage-one answer
//! block once, so several algorithms can be compared on the same draw.

use std::sync::OnceLock;

use rand::Rng;

use crate::budgets::stage1_recommendation;
use crate::cluster::sdp::{cluster_workers_sdp, SdpClustering, SdpConfig};
use crate::cluster::{cluster_sequential, Clustering, StageOneBlock};
use crate::error::{Error, Result};
use crate::model::{
    add_answers, assign_per_cluster_capped, assign_uniform, sample_world, AnswerMatrix, AssignmentPlan,
    Label, ModelParams, World,
};
use crate::rng::{Seed, Stream};
use crate::scalar::Scalar;
use crate::voting::{decide, VoteOutcome};

/// Per-cluster tallies of the answers to one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TallyVector {
    /// `T_z`: sum of `+-1` answers from cluster `z`.
    pub sums: Vec<i64>,
    /// `S_z`: number of `+1` answers from cluster `z`.
    pub positives: Vec<usize>,
    /// Number of answers from cluster `z`.
    pub counts: Vec<usize>,
}

impl TallyVector {
    /// Tallies the answers to `task` from workers accepted by `keep`.
    pub fn collect(
        answers: &AnswerMatrix,
        clustering: &Clustering,
        task: usize,
        keep: impl Fn(usize) -> bool,
    ) -> Self {
        let c = clustering.num_clusters();
        let mut t = TallyVector { sums: vec![0; c], positives: vec![0; c], counts: vec![0; c] };
        for &(j, v) in answers.task_answers(task) {
            if !keep(j) {
                continue;
            }
            let z = clustering.cluster_of(j);
            t.sums[z] += v.sign();
            t.counts[z] += 1;
            if v == Label::Pos {
                t.positives[z] += 1;
            }
        }
        t
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `argmax_z |T_z|` over clusters with at least one answer, lowest id on ties.
    pub fn matched(&self) -> Result<usize> {
        let mut best: Option<usize> = None;
        for z in 0..self.sums.len() {
            if self.counts[z] == 0 {
                continue;
            }
            if best.is_none_or(|b| self.sums[z].abs() > self.sums[b].abs()) {
                best = Some(z);
            }
        }
        best.ok_or(Error::NoVotes)
    }

    /// `sum_z w_z T_z`, with the matched cluster weighted by `wm`, others by `wu`.
    fn margin<T: Scalar>(&self, matched: usize, wm: T, wu: T) -> T {
        self.sums
            .iter()
            .enumerate()
            .map(|(z, &s)| if z == matched { wm } else { wu } * T::lit(s as f64))
            .sum()
    }
}

fn check_task(answers: &AnswerMatrix, clustering: &Clustering, task: usize) -> Result<()> {
    if task >= answers.m() {
        return Err(Error::IndexOutOfRange(format!("task {task}")));
    }
    if clustering.n() != answers.n() {
        return Err(Error::InvalidDimension(format!(
            "clustering covers {} workers, answers {}",
            clustering.n(),
            answers.n()
        )));
    }
    Ok(())
}

/// Cluster whose members agree most strongly on `task`.
pub fn type_match(answers: &AnswerMatrix, clustering: &Clustering, task: usize) -> Result<usize> {
    check_task(answers, clustering, task)?;
    TallyVector::collect(answers, clustering, task, |_| true).matched()
}

/// Majority vote over the answers from the matched cluster only.
pub fn infer_prior_alg(answers: &AnswerMatrix, clustering: &Clustering, task: usize, seed: Seed) -> Result<Label> {
    check_task(answers, clustering, task)?;
    let tally = TallyVector::collect(answers, clustering, task, |_| true);
    let z = tally.matched()?;
    Ok(decide(tally.sums[z], seed).label)
}

/// Weighted vote over all answers, `2p - 1` for the matched cluster and `2q - 1`
/// for the rest.
pub fn infer_alg1<T: Scalar>(
    answers: &AnswerMatrix,
    clustering: &Clustering,
    task: usize,
    params: &ModelParams<T>,
    seed: Seed,
) -> Result<Label> {
    check_task(answers, clustering, task)?;
    let tally = TallyVector::collect(answers, clustering, task, |_| true);
    let z = tally.matched()?;
    let two = T::lit(2.0);
    let margin = tally.margin(z, two * params.p() - T::one(), two * params.q() - T::one());
    Ok(decide(margin, seed).label)
}

/// Random split of every cluster into an estimation part `V_z^(1)` (probability
/// `beta`) and a voting part `V_z^(2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerSplit {
    beta: f64,
    first: Vec<bool>,
    parts: Vec<(Vec<usize>, Vec<usize>)>,
}

impl WorkerSplit {
    /// Explicit split; `first[j]` puts worker `j` in `W^(1)`.
    pub fn from_flags(clustering: &Clustering, first: Vec<bool>, beta: f64) -> Result<Self> {
        if first.len() != clustering.n() {
            return Err(Error::InvalidDimension("split flags do not cover all workers".into()));
        }
        let parts = clustering
            .clusters()
            .iter()
            .map(|members| members.iter().partition::<Vec<usize>, _>(|&&j| first[j]))
            .collect();
        Ok(WorkerSplit { beta, first, parts })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn in_first(&self, worker: usize) -> bool {
        self.first[worker]
    }

    /// `V_z^(1)`.
    pub fn first_part(&self, cluster: usize) -> &[usize] {
        &self.parts[cluster].0
    }

    /// `V_z^(2)`.
    pub fn second_part(&self, cluster: usize) -> &[usize] {
        &self.parts[cluster].1
    }

    /// `|W^(1)|`.
    pub fn first_size(&self) -> usize {
        self.first.iter().filter(|&&f| f).count()
    }
}

/// One independent coin per worker, in worker order.
pub fn split_workers(clustering: &Clustering, beta: f64, seed: Seed) -> Result<WorkerSplit> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::OutOfRange(format!("beta = {beta} outside [0, 1]")));
    }
    let mut rng = seed.rng(Stream::Split);
    let first = (0..clustering.n()).map(|_| rng.gen::<f64>() < beta).collect();
    WorkerSplit::from_flags(clustering, first, beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityEstimates<T> {
    /// Clamped and ordered estimates.
    pub p_hat: T,
    pub q_hat: T,
    /// Averages before clamping and ordering.
    pub raw_p_hat: T,
    pub raw_q_hat: T,
    /// Set when the raw averages came out with `p < q` and were swapped.
    pub swapped: bool,
    /// `(task, p_i, q_i)` for every task that entered the averages.
    pub per_task: Vec<(usize, T, T)>,
    pub skipped: usize,
}

fn majority_fraction<T: Scalar>(positives: usize, total: usize) -> T {
    let pos = T::from_count(positives) / T::from_count(total);
    pos.max(T::one() - pos)
}

/// Averages, over `tasks`, the majority fraction among matched-cluster `W^(1)`
/// answers (`p_i`) and among the other `W^(1)` answers (`q_i`).
///
/// The matched cluster is found from all answers to the task. Tasks lacking
/// either kind of answer are skipped.
pub fn estimate_pq<T: Scalar>(
    answers: &AnswerMatrix,
    clustering: &Clustering,
    split: &WorkerSplit,
    tasks: &[usize],
) -> Result<ReliabilityEstimates<T>> {
    let mut per_task = Vec::new();
    let mut skipped = 0;
    for &i in tasks {
        check_task(answers, clustering, i)?;
        let all = TallyVector::collect(answers, clustering, i, |_| true);
        let Ok(z) = all.matched() else {
            skipped += 1;
            continue;
        };
        let held = TallyVector::collect(answers, clustering, i, |j| split.in_first(j));
        let m_count = held.counts[z];
        let u_count = held.total() - m_count;
        if m_count == 0 || u_count == 0 {
            skipped += 1;
            continue;
        }
        let m_pos = held.positives[z];
        let u_pos: usize = held.positives.iter().sum::<usize>() - m_pos;
        per_task.push((i, majority_fraction::<T>(m_pos, m_count), majority_fraction::<T>(u_pos, u_count)));
    }
    if per_task.is_empty() {
        return Err(Error::EstimationFailed(format!("all {skipped} tasks skipped")));
    }
    let k = T::from_count(per_task.len());
    let raw_p_hat = per_task.iter().map(|t| t.1).sum::<T>() / k;
    let raw_q_hat = per_task.iter().map(|t| t.2).sum::<T>() / k;
    let clamp = |v: T| v.max(T::lit(0.5)).min(T::one());
    let (mut p_hat, mut q_hat) = (clamp(raw_p_hat), clamp(raw_q_hat));
    let swapped = p_hat < q_hat;
    if swapped {
        std::mem::swap(&mut p_hat, &mut q_hat);
    }
    Ok(ReliabilityEstimates { p_hat, q_hat, raw_p_hat, raw_q_hat, swapped, per_task, skipped })
}

/// Weighted vote over the `W^(2)` answers with plug-in weights `2p^ - 1` and
/// `2q^ - 1`. Falls back to uniform weights when the estimates coincide or
/// every weight in play is zero.
pub fn infer_alg2<T: Scalar>(
    answers: &AnswerMatrix,
    clustering: &Clustering,
    split: &WorkerSplit,
    estimates: &ReliabilityEstimates<T>,
    task: usize,
    seed: Seed,
) -> Result<Label> {
    check_task(answers, clustering, task)?;
    let z = TallyVector::collect(answers, clustering, task, |_| true).matched()?;
    let vote = TallyVector::collect(answers, clustering, task, |j| !split.in_first(j));
    if vote.total() == 0 {
        return Err(Error::NoVotes);
    }
    let two = T::lit(2.0);
    let mut wm = two * estimates.p_hat - T::one();
    let mut wu = two * estimates.q_hat - T::one();
    let others = vote.total() - vote.counts[z];
    let all_zero = (wm.is_zero() || vote.counts[z] == 0) && (wu.is_zero() || others == 0);
    if estimates.p_hat == estimates.q_hat || all_zero {
        wm = T::one();
        wu = T::one();
    }
    Ok(decide(vote.margin(z, wm, wu), seed).label)
}

/// Weighted vote with the true fidelities, `2 f_ij - 1` per answer.
pub fn infer_oracle<T: Scalar>(
    answers: &AnswerMatrix,
    world: &World,
    params: &ModelParams<T>,
    task: usize,
    seed: Seed,
) -> Result<VoteOutcome<T>> {
    let row = answers.task_answers(task);
    if row.is_empty() {
        return Err(Error::NoVotes);
    }
    let two = T::lit(2.0);
    let t = world.task_types[task];
    let margin = row
        .iter()
        .map(|&(j, v)| (two * params.fidelity(t, world.worker_types[j]) - T::one()) * v.to_scalar::<T>())
        .sum();
    Ok(decide(margin, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Mv,
    OracleWmv,
    Prior,
    Alg1,
    Alg2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Mv, Algorithm::OracleWmv, Algorithm::Prior, Algorithm::Alg1, Algorithm::Alg2];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mv => "mv",
            Algorithm::OracleWmv => "oracle_wmv",
            Algorithm::Prior => "prior",
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown algorithm '{s}'")))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Clustering procedure used by prior and alg1.
/// alg2 always clusters with the SDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StageOneMethod {
    #[default]
    Threshold,
    Sdp,
}

impl std::str::FromStr for StageOneMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(StageOneMethod::Threshold),
            "sdp" => Ok(StageOneMethod::Sdp),
            _ => Err(Error::InvalidParams(format!("unknown stage-one method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<T> {
    /// Stage-one tasks, each answered by every worker.
    pub r: usize,
    /// Stage-two queries per cluster and task. `mv` and `oracle_wmv` instead get
    /// `l * d` uniformly drawn workers per stage-two task.
    pub l: usize,
    /// Agreement threshold for threshold clustering.
    pub zeta: T,
    pub stage_one: StageOneMethod,
    pub beta: f64,
    pub sdp: SdpConfig<T>,
}

impl<T: Scalar> PipelineConfig<T> {
    /// `r`, `l` and `zeta` from [`stage1_recommendation`].
    pub fn recommended(params: &ModelParams<T>, alpha_c: T, n: usize) -> Result<Self> {
        let rec = stage1_recommendation(params, alpha_c, n)?;
        Ok(PipelineConfig {
            r: rec.r,
            l: rec.l,
            zeta: rec.zeta,
            stage_one: StageOneMethod::Threshold,
            beta: 0.3,
            sdp: SdpConfig::default(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult<T> {
    pub algorithm: Algorithm,
    pub predictions: Vec<Label>,
    pub error_fraction: T,
    /// `(n r + sum_i |N_i^stage2|) / m`.
    pub queries_per_task: T,
    /// Stage-two queries per stage-two task.
    pub stage2_queries_per_task: T,
    /// Whether the clustering used matches the true worker types.
    pub clustering_ok: Option<bool>,
    pub num_clusters: Option<usize>,
    pub estimates: Option<ReliabilityEstimates<T>>,
}

/// One sampled world with its stage-one answers: the first `r` tasks answered by
/// all workers. Clusterings are computed on first use and cached.
#[derive(Debug)]
pub struct Trial<T: Scalar> {
    params: ModelParams<T>,
    world: World,
    r: usize,
    stage_one: AnswerMatrix,
    block: StageOneBlock,
    seed: Seed,
    sdp: OnceLock<Result<SdpClustering<T>>>,
}

impl<T: Scalar> Trial<T> {
    pub fn sample(params: &ModelParams<T>, m: usize, n: usize, r: usize, seed: Seed) -> Result<Self> {
        let world = sample_world(params, m, n, seed.derive_named("world"))?;
        Self::from_world(params, world, r, seed)
    }

    pub fn from_world(params: &ModelParams<T>, world: World, r: usize, seed: Seed) -> Result<Self> {
        if r == 0 || r >= world.m() {
            return Err(Error::InvalidParams(format!("need 0 < r < m, got r={r}, m={}", world.m())));
        }
        let n = world.n();
        let tasks: Vec<usize> = (0..r).collect();
        let plan = assign_uniform(n, &tasks, n, seed.derive_named("stage1"))?;
        let mut stage_one = AnswerMatrix::new(world.m(), n);
        add_answers(&mut stage_one, &world, params, &plan, seed.derive_named("stage1"))?;
        let block = StageOneBlock::from_answers(&stage_one, &tasks)?;
        Ok(Trial { params: *params, world, r, stage_one, block, seed, sdp: OnceLock::new() })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn block(&self) -> &StageOneBlock {
        &self.block
    }

    pub fn stage_one_answers(&self) -> &AnswerMatrix {
        &self.stage_one
    }

    pub fn threshold_clustering(&self, zeta: T) -> Result<Clustering> {
        cluster_sequential(&self.block, zeta)
    }

    /// SDP clustering; `cfg` is only read on the first call.
    pub fn sdp_clustering(&self, cfg: &SdpConfig<T>) -> Result<&SdpClustering<T>> {
        self.sdp
            .get_or_init(|| cluster_workers_sdp(&self.block, self.params.d(), self.seed.derive_named("medoids"), cfg))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn tie_seed(&self, task: usize) -> Seed {
        self.seed.derive_named("tie").derive(task as u64)
    }

    /// Stage-one answers plus stage-two answers drawn for `plan`.
    fn answers_with(&self, plan: &AssignmentPlan) -> Result<AnswerMatrix> {
        let mut answers = self.stage_one.clone();
        add_answers(&mut answers, &self.world, &self.params, plan, self.seed.derive_named("stage2"))?;
        Ok(answers)
    }

    pub fn run(&self, algorithm: Algorithm, cfg: &PipelineConfig<T>) -> Result<PipelineResult<T>> {
        let m = self.world.m();
        let n = self.world.n();
        let stage_two: Vec<usize> = (self.r..m).collect();
        let plan_seed = self.seed.derive_named("plan");

        let clustering = match algorithm {
            Algorithm::Mv | Algorithm::OracleWmv => None,
            Algorithm::Prior | Algorithm::Alg1 => Some(match cfg.stage_one {
                StageOneMethod::Threshold => self.threshold_clustering(cfg.zeta)?,
                StageOneMethod::Sdp => self.sdp_clustering(&cfg.sdp)?.clustering.clone(),
            }),
            Algorithm::Alg2 => Some(self.sdp_clustering(&cfg.sdp)?.clustering.clone()),
        };
        let plan = match &clustering {
            None => assign_uniform(n, &stage_two, cfg.l * self.params.d(), plan_seed)?,
            Some(c) => assign_per_cluster_capped(c, &stage_two, cfg.l, plan_seed)?,
        };
        let answers = self.answers_with(&plan)?;

        let mut estimates = None;
        let predictions: Vec<Label> = match algorithm {
            Algorithm::Mv => (0..m)
                .map(|i| {
                    let votes: Vec<Label> = answers.task_answers(i).iter().map(|a| a.1).collect();
                    crate::voting::majority_vote(&votes, self.tie_seed(i)).map(|o| o.label)
                })
                .collect::<Result<_>>()?,
            Algorithm::OracleWmv => (0..m)
                .map(|i| infer_oracle(&answers, &self.world, &self.params, i, self.tie_seed(i)).map(|o| o.label))
                .collect::<Result<_>>()?,
            Algorithm::Prior => {
                let c = clustering.as_ref().expect("clustered");
                (0..m).map(|i| infer_prior_alg(&answers, c, i, self.tie_seed(i))).collect::<Result<_>>()?
            }
            Algorithm::Alg1 => {
                let c = clustering.as_ref().expect("clustered");
                (0..m)
                    .map(|i| infer_alg1(&answers, c, i, &self.params, self.tie_seed(i)))
                    .collect::<Result<_>>()?
            }
            Algorithm::Alg2 => {
                let c = clustering.as_ref().expect("clustered");
                let split = split_workers(c, cfg.beta, self.seed.derive_named("split"))?;
                let est = estimate_pq::<T>(&answers, c, &split, &stage_two)?;
                // a task whose workers all landed in W^(1) gets the tie coin
                let out = (0..m)
                    .map(|i| match infer_alg2(&answers, c, &split, &est, i, self.tie_seed(i)) {
                        Err(Error::NoVotes) => Ok(decide(0i64, self.tie_seed(i)).label),
                        other => other,
                    })
                    .collect::<Result<_>>()?;
                estimates = Some(est);
                out
            }
        };

        let errors = predictions.iter().zip(&self.world.labels).filter(|(a, b)| a != b).count();
        let stage2_total = plan.total_queries();
        Ok(PipelineResult {
            algorithm,
            error_fraction: T::from_count(errors) / T::from_count(m),
            queries_per_task: T::from_count(n * self.r + stage2_total) / T::from_count(m),
            stage2_queries_per_task: T::from_count(stage2_total) / T::from_count(stage_two.len()),
            clustering_ok: clustering.as_ref().map(|c| c.same_partition(&self.world.worker_types)),
            num_clusters: clustering.as_ref().map(Clustering::num_clusters),
            estimates,
            predictions,
        })
    }
}

/// Runs a single algorithm end to end on `world`.
pub fn run_pipeline<T: Scalar>(
    world: World,
    params: &ModelParams<T>,
    algorithm: Algorithm,
    cfg: &PipelineConfig<T>,
    seed: Seed,
) -> Result<PipelineResult<T>> {
    Trial::from_world(params, world, cfg.r, seed)?.run(algorithm, cfg)
}
