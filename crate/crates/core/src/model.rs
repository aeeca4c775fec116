//! Ground truth, task assignment and noisy answers under the d-type
//! specialization model.
//!
//! Types are 0-based throughout (`0..d`); workers and tasks are indexed from 0.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::seq::index::sample;
use rand::Rng;

use crate::cluster::Clustering;
use crate::error::{Error, Result};
use crate::rng::{Seed, Stream};
use crate::scalar::Scalar;

/// A binary answer or label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn sign(self) -> i64 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    pub fn from_sign(v: i64) -> Option<Label> {
        match v {
            1 => Some(Label::Pos),
            -1 => Some(Label::Neg),
            _ => None,
        }
    }

    pub fn to_scalar<T: Scalar>(self) -> T {
        match self {
            Label::Pos => T::one(),
            Label::Neg => -T::one(),
        }
    }
}

/// Reliability model: `d` types, matched fidelity `p`, unmatched fidelity `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    d: usize,
    p: T,
    q: T,
}

impl<T: Scalar> ModelParams<T> {
    /// Requires `d >= 1` and `1/2 <= q < p <= 1`.
    pub fn new(d: usize, p: T, q: T) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("d must be at least 1".into()));
        }
        let half = T::lit(0.5);
        if !(p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidParams("p and q must be finite".into()));
        }
        if !(q >= half && q < p && p <= T::one()) {
            return Err(Error::InvalidParams(format!(
                "need 1/2 <= q < p <= 1, got p={p}, q={q}"
            )));
        }
        Ok(ModelParams { d, p, q })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// Probability that a worker of type `worker_type` answers a task of type
    /// `task_type` correctly.
    pub fn fidelity(&self, task_type: usize, worker_type: usize) -> T {
        if task_type == worker_type {
            self.p
        } else {
            self.q
        }
    }

    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        ModelParams {
            d: self.d,
            p: U::lit(self.p.as_f64()),
            q: U::lit(self.q.as_f64()),
        }
    }
}

/// Ground truth: task labels, task types and worker types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub labels: Vec<Label>,
    pub task_types: Vec<usize>,
    pub worker_types: Vec<usize>,
    pub d: usize,
}

impl World {
    pub fn new(
        labels: Vec<Label>,
        task_types: Vec<usize>,
        worker_types: Vec<usize>,
        d: usize,
    ) -> Result<Self> {
        if labels.is_empty() || worker_types.is_empty() {
            return Err(Error::InvalidDimension("need m >= 1 and n >= 1".into()));
        }
        if labels.len() != task_types.len() {
            return Err(Error::InvalidDimension(
                "labels and task types differ in length".into(),
            ));
        }
        if task_types.iter().chain(&worker_types).any(|&t| t >= d) {
            return Err(Error::InvalidDimension(format!("type outside 0..{d}")));
        }
        Ok(World {
            labels,
            task_types,
            worker_types,
            d,
        })
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn n(&self) -> usize {
        self.worker_types.len()
    }

    /// Workers grouped by true type; entry `z` lists the workers of type `z`.
    pub fn workers_by_type(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.d];
        for (j, &w) in self.worker_types.iter().enumerate() {
            groups[w].push(j);
        }
        groups
    }
}

/// Draws task labels, task types and worker types independently and uniformly.
pub fn sample_world<T: Scalar>(params: &ModelParams<T>, m: usize, n: usize, seed: Seed) -> Result<World> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension("need m >= 1 and n >= 1".into()));
    }
    let d = params.d();
    let mut rng = seed.rng(Stream::World);
    let labels = (0..m)
        .map(|_| if rng.gen::<bool>() { Label::Pos } else { Label::Neg })
        .collect();
    let task_types = (0..m).map(|_| rng.gen_range(0..d)).collect();
    let worker_types = (0..n).map(|_| rng.gen_range(0..d)).collect();
    World::new(labels, task_types, worker_types, d)
}

/// Workers assigned to each listed task.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssignmentPlan {
    entries: Vec<(usize, Vec<usize>)>,
}

impl AssignmentPlan {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `workers` for `task`; rejects duplicates within the list.
    pub fn push(&mut self, task: usize, workers: Vec<usize>) -> Result<()> {
        let mut seen = HashSet::with_capacity(workers.len());
        for &w in &workers {
            if !seen.insert(w) {
                return Err(Error::DuplicateWorker { task, worker: w });
            }
        }
        self.entries.push((task, workers));
        Ok(())
    }

    pub fn entries(&self) -> &[(usize, Vec<usize>)] {
        &self.entries
    }

    pub fn workers_for(&self, task: usize) -> impl Iterator<Item = &usize> {
        self.entries
            .iter()
            .filter(move |(t, _)| *t == task)
            .flat_map(|(_, w)| w.iter())
    }

    pub fn total_queries(&self) -> usize {
        self.entries.iter().map(|(_, w)| w.len()).sum()
    }

    pub fn extend(&mut self, other: AssignmentPlan) {
        self.entries.extend(other.entries);
    }
}

/// Every listed task gets `k` distinct workers drawn uniformly from `0..n`.
pub fn assign_uniform(n: usize, tasks: &[usize], k: usize, seed: Seed) -> Result<AssignmentPlan> {
    if k > n {
        return Err(Error::InvalidAssignment { k, n });
    }
    let mut rng = seed.rng(Stream::Assignment);
    let mut plan = AssignmentPlan::new();
    for &task in tasks {
        let workers = sample(&mut rng, n, k).into_vec();
        plan.push(task, workers)?;
    }
    Ok(plan)
}

/// Every listed task gets `l` distinct workers from each cluster.
pub fn assign_per_cluster(
    clustering: &Clustering,
    tasks: &[usize],
    l: usize,
    seed: Seed,
) -> Result<AssignmentPlan> {
    for (z, members) in clustering.clusters().iter().enumerate() {
        if members.len() < l {
            return Err(Error::InsufficientCluster {
                cluster: z,
                size: members.len(),
                required: l,
            });
        }
    }
    assign_per_cluster_capped(clustering, tasks, l, seed)
}

/// Like [`assign_per_cluster`], but a cluster with fewer than `l` members
/// contributes all of them.
pub fn assign_per_cluster_capped(
    clustering: &Clustering,
    tasks: &[usize],
    l: usize,
    seed: Seed,
) -> Result<AssignmentPlan> {
    let mut rng = seed.rng(Stream::Assignment);
    let mut plan = AssignmentPlan::new();
    for &task in tasks {
        let mut workers = Vec::with_capacity(l * clustering.num_clusters());
        for members in clustering.clusters() {
            let k = l.min(members.len());
            workers.extend(sample(&mut rng, members.len(), k).into_iter().map(|k| members[k]));
        }
        plan.push(task, workers)?;
    }
    Ok(plan)
}

/// Sparse `m x n` answer matrix. Absent entries are unassigned pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerMatrix {
    n: usize,
    rows: Vec<Vec<(usize, Label)>>,
}

impl AnswerMatrix {
    pub fn new(m: usize, n: usize) -> Self {
        AnswerMatrix {
            n,
            rows: vec![Vec::new(); m],
        }
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stores an answer, replacing any existing answer for the pair.
    pub fn set(&mut self, task: usize, worker: usize, v: Label) -> Result<()> {
        if task >= self.m() || worker >= self.n {
            return Err(Error::IndexOutOfRange(format!(
                "({task}, {worker}) outside {}x{}",
                self.m(),
                self.n
            )));
        }
        let row = &mut self.rows[task];
        match row.binary_search_by_key(&worker, |&(j, _)| j) {
            Ok(pos) => row[pos].1 = v,
            Err(pos) => row.insert(pos, (worker, v)),
        }
        Ok(())
    }

    pub fn get(&self, task: usize, worker: usize) -> Option<Label> {
        let row = self.rows.get(task)?;
        row.binary_search_by_key(&worker, |&(j, _)| j)
            .ok()
            .map(|pos| row[pos].1)
    }

    /// Answers for task `i`, sorted by worker index. The workers are `N_i`.
    pub fn task_answers(&self, task: usize) -> &[(usize, Label)] {
        &self.rows[task]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Label)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }

    /// Writes `m n d p q` followed by one `i j v` line per stored answer.
    pub fn write_text<T: Scalar, W: Write>(&self, params: &ModelParams<T>, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {} {} {}", self.m(), self.n, params.d(), params.p(), params.q())?;
        for (i, j, v) in self.iter() {
            writeln!(out, "{i} {j} {}", v.sign())?;
        }
        Ok(())
    }

    pub fn read_text<T: Scalar, R: BufRead>(input: R) -> Result<(ModelParams<T>, AnswerMatrix)> {
        let mut lines = data_lines(input);
        let (line_no, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing header".into() })??;
        let (m, n, params) = parse_header(line_no, &header)?;
        let mut answers = AnswerMatrix::new(m, n);
        for item in lines {
            let (line_no, line) = item?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(parse_err(line_no, "expected `i j v`"));
            }
            let i = parse_field::<usize>(line_no, f[0])?;
            let j = parse_field::<usize>(line_no, f[1])?;
            let v = Label::from_sign(parse_field::<i64>(line_no, f[2])?)
                .ok_or_else(|| parse_err(line_no, "answer must be -1 or 1"))?;
            answers
                .set(i, j, v)
                .map_err(|e| parse_err(line_no, &e.to_string()))?;
        }
        Ok((params, answers))
    }
}

impl World {
    /// Writes `m n d p q`, then `t i a_i t_i` per task and `w j w_j` per worker.
    pub fn write_text<T: Scalar, W: Write>(&self, params: &ModelParams<T>, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {} {} {}", self.m(), self.n(), self.d, params.p(), params.q())?;
        for (i, (a, t)) in self.labels.iter().zip(&self.task_types).enumerate() {
            writeln!(out, "t {i} {} {t}", a.sign())?;
        }
        for (j, w) in self.worker_types.iter().enumerate() {
            writeln!(out, "w {j} {w}")?;
        }
        Ok(())
    }

    pub fn read_text<T: Scalar, R: BufRead>(input: R) -> Result<(ModelParams<T>, World)> {
        let mut lines = data_lines(input);
        let (line_no, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing header".into() })??;
        let (m, n, params) = parse_header::<T>(line_no, &header)?;
        let mut labels = vec![None; m];
        let mut task_types = vec![0; m];
        let mut worker_types = vec![None; n];
        for item in lines {
            let (line_no, line) = item?;
            let f: Vec<&str> = line.split_whitespace().collect();
            match f.as_slice() {
                ["t", i, a, t] => {
                    let i = parse_field::<usize>(line_no, i)?;
                    if i >= m {
                        return Err(parse_err(line_no, "task index out of range"));
                    }
                    labels[i] = Some(
                        Label::from_sign(parse_field(line_no, a)?)
                            .ok_or_else(|| parse_err(line_no, "label must be -1 or 1"))?,
                    );
                    task_types[i] = parse_field(line_no, t)?;
                }
                ["w", j, w] => {
                    let j = parse_field::<usize>(line_no, j)?;
                    if j >= n {
                        return Err(parse_err(line_no, "worker index out of range"));
                    }
                    worker_types[j] = Some(parse_field(line_no, w)?);
                }
                _ => return Err(parse_err(line_no, "expected `t i a t` or `w j w`")),
            }
        }
        let labels = labels
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| parse_err(0, "missing task line"))?;
        let worker_types = worker_types
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| parse_err(0, "missing worker line"))?;
        let world = World::new(labels, task_types, worker_types, params.d())?;
        Ok((params, world))
    }
}

fn data_lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<(usize, String)>> {
    input
        .lines()
        .enumerate()
        .map(|(k, l)| {
            l.map(|s| (k + 1, s))
                .map_err(|e| Error::Parse { line: k + 1, msg: e.to_string() })
        })
        .filter(|r| !matches!(r, Ok((_, s)) if s.trim().is_empty()))
}

fn parse_header<T: Scalar>(line_no: usize, header: &str) -> Result<(usize, usize, ModelParams<T>)> {
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 5 {
        return Err(parse_err(line_no, "header must be `m n d p q`"));
    }
    let m = parse_field::<usize>(line_no, f[0])?;
    let n = parse_field::<usize>(line_no, f[1])?;
    let d = parse_field::<usize>(line_no, f[2])?;
    let p = parse_field::<f64>(line_no, f[3])?;
    let q = parse_field::<f64>(line_no, f[4])?;
    let params = ModelParams::new(d, T::lit(p), T::lit(q))?;
    Ok((m, n, params))
}

fn parse_field<F: std::str::FromStr>(line: usize, s: &str) -> Result<F> {
    s.parse()
        .map_err(|_| parse_err(line, &format!("cannot parse `{s}`")))
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse { line, msg: msg.to_string() }
}

/// Draws an answer for every assigned pair in plan order: the true label with
/// probability `f_ij`, its negation otherwise.
pub fn sample_answers<T: Scalar>(
    world: &World,
    params: &ModelParams<T>,
    plan: &AssignmentPlan,
    seed: Seed,
) -> Result<AnswerMatrix> {
    let mut answers = AnswerMatrix::new(world.m(), world.n());
    add_answers(&mut answers, world, params, plan, seed)?;
    Ok(answers)
}

/// Like [`sample_answers`] but writes into an existing matrix.
pub fn add_answers<T: Scalar>(
    answers: &mut AnswerMatrix,
    world: &World,
    params: &ModelParams<T>,
    plan: &AssignmentPlan,
    seed: Seed,
) -> Result<()> {
    let mut rng = seed.rng(Stream::Answers);
    for (task, workers) in plan.entries() {
        let task = *task;
        if task >= world.m() {
            return Err(Error::IndexOutOfRange(format!("task {task}")));
        }
        let truth = world.labels[task];
        let t = world.task_types[task];
        for &j in workers {
            if j >= world.n() {
                return Err(Error::IndexOutOfRange(format!("worker {j}")));
            }
            let f = params.fidelity(t, world.worker_types[j]).as_f64();
            let v = if rng.gen::<f64>() < f { truth } else { truth.flip() };
            answers.set(task, j, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: usize, p: f64, q: f64) -> ModelParams<f64> {
        ModelParams::new(d, p, q).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(3, 0.9, 0.6).is_ok());
        assert!(ModelParams::new(3, 0.6, 0.6).is_err());
        assert!(ModelParams::new(3, 0.9, 0.4).is_err());
        assert!(ModelParams::new(3, 1.1, 0.6).is_err());
        assert!(ModelParams::new(0, 0.9, 0.6).is_err());
        assert!(ModelParams::<f32>::new(2, 1.0, 0.5).is_ok());
    }

    #[test]
    fn single_type_world() {
        let w = sample_world(&params(1, 0.9, 0.5), 50, 20, Seed(1)).unwrap();
        assert!(w.task_types.iter().all(|&t| t == 0));
        assert!(w.worker_types.iter().all(|&t| t == 0));
    }

    #[test]
    fn world_is_deterministic() {
        let p = params(3, 0.9, 0.6);
        assert_eq!(
            sample_world(&p, 100, 30, Seed(9)).unwrap(),
            sample_world(&p, 100, 30, Seed(9)).unwrap()
        );
        assert_ne!(
            sample_world(&p, 100, 30, Seed(9)).unwrap(),
            sample_world(&p, 100, 30, Seed(10)).unwrap()
        );
    }

    #[test]
    fn world_type_frequencies() {
        let w = sample_world(&params(3, 0.9, 0.6), 30_000, 300, Seed(3)).unwrap();
        for z in 0..3 {
            let f = w.task_types.iter().filter(|&&t| t == z).count() as f64 / 30_000.0;
            assert!((f - 1.0 / 3.0).abs() <= 0.02, "task type {z}: {f}");
            let g = w.worker_types.iter().filter(|&&t| t == z).count() as f64 / 300.0;
            assert!((g - 1.0 / 3.0).abs() <= 0.1, "worker type {z}: {g}");
        }
        let pos = w.labels.iter().filter(|&&a| a == Label::Pos).count() as f64 / 30_000.0;
        assert!((pos - 0.5).abs() < 0.02);
    }

    #[test]
    fn zero_dimensions_rejected() {
        let p = params(2, 0.9, 0.6);
        assert!(sample_world(&p, 0, 5, Seed(0)).is_err());
        assert!(sample_world(&p, 5, 0, Seed(0)).is_err());
    }

    #[test]
    fn uniform_assignment_edge_cases() {
        let tasks: Vec<usize> = (0..5).collect();
        let full = assign_uniform(7, &tasks, 7, Seed(0)).unwrap();
        for (_, w) in full.entries() {
            let mut w = w.clone();
            w.sort();
            assert_eq!(w, (0..7).collect::<Vec<_>>());
        }
        let empty = assign_uniform(7, &tasks, 0, Seed(0)).unwrap();
        assert!(empty.entries().iter().all(|(_, w)| w.is_empty()));
        assert_eq!(
            assign_uniform(3, &tasks, 4, Seed(0)),
            Err(Error::InvalidAssignment { k: 4, n: 3 })
        );
    }

    #[test]
    fn uniform_assignment_balance() {
        // each worker is picked with probability 3/10 per task
        let tasks: Vec<usize> = (0..1000).collect();
        let plan = assign_uniform(10, &tasks, 3, Seed(5)).unwrap();
        let mut counts = [0usize; 10];
        for (_, w) in plan.entries() {
            assert_eq!(w.len(), 3);
            for &j in w {
                counts[j] += 1;
            }
        }
        let sigma = (1000.0f64 * 0.3 * 0.7).sqrt();
        for c in counts {
            assert!((c as f64 - 300.0).abs() <= 3.0 * sigma, "count {c}");
        }
    }

    #[test]
    fn per_cluster_assignment() {
        let c = Clustering::from_assignments(&[0, 1, 2, 0, 1, 2, 0, 1, 2]).unwrap();
        let tasks: Vec<usize> = (0..20).collect();
        let plan = assign_per_cluster(&c, &tasks, 2, Seed(1)).unwrap();
        for (_, w) in plan.entries() {
            assert_eq!(w.len(), 6);
            for z in 0..3 {
                assert_eq!(w.iter().filter(|&&j| c.cluster_of(j) == z).count(), 2);
            }
        }
        let single = Clustering::from_assignments(&[0; 5]).unwrap();
        let plan = assign_per_cluster(&single, &tasks, 5, Seed(1)).unwrap();
        assert!(plan.entries().iter().all(|(_, w)| w.len() == 5));

        let small = Clustering::from_assignments(&[0, 0, 1]).unwrap();
        assert_eq!(
            assign_per_cluster(&small, &tasks, 2, Seed(1)),
            Err(Error::InsufficientCluster { cluster: 1, size: 1, required: 2 })
        );
    }

    #[test]
    fn noiseless_answers_match_truth() {
        let p = params(3, 1.0, 0.99);
        let p = ModelParams { q: 1.0, ..p };
        let w = sample_world(&p, 40, 12, Seed(2)).unwrap();
        let tasks: Vec<usize> = (0..40).collect();
        let plan = assign_uniform(12, &tasks, 12, Seed(3)).unwrap();
        let a = sample_answers(&w, &p, &plan, Seed(4)).unwrap();
        assert_eq!(a.nnz(), 40 * 12);
        assert!(a.iter().all(|(i, _, v)| v == w.labels[i]));
    }

    #[test]
    fn matched_pairs_with_perfect_p() {
        let p = params(3, 1.0, 0.5);
        let w = sample_world(&p, 200, 30, Seed(2)).unwrap();
        let mut plan = AssignmentPlan::new();
        for i in 0..200 {
            let matched: Vec<usize> = (0..30).filter(|&j| w.worker_types[j] == w.task_types[i]).collect();
            plan.push(i, matched).unwrap();
        }
        let a = sample_answers(&w, &p, &plan, Seed(4)).unwrap();
        assert!(a.nnz() > 0);
        assert!(a.iter().all(|(i, _, v)| v == w.labels[i]));
    }

    #[test]
    fn matched_correct_rate() {
        // 10^5 matched pairs at p = 0.9: 3 sigma = 3 * sqrt(0.09 / 1e5) ~ 0.00285
        let p = params(2, 0.9, 0.6);
        let w = World::new(vec![Label::Pos; 1000], vec![0; 1000], vec![0; 100], 2).unwrap();
        let tasks: Vec<usize> = (0..1000).collect();
        let plan = assign_uniform(100, &tasks, 100, Seed(8)).unwrap();
        let a = sample_answers(&w, &p, &plan, Seed(9)).unwrap();
        let correct = a.iter().filter(|&(_, _, v)| v == Label::Pos).count() as f64 / 1e5;
        assert!((0.897..=0.903).contains(&correct), "{correct}");
    }

    #[test]
    fn answers_deterministic_and_bounds_checked() {
        let p = params(2, 0.8, 0.6);
        let w = sample_world(&p, 10, 5, Seed(1)).unwrap();
        let plan = assign_uniform(5, &[0, 1, 2], 3, Seed(1)).unwrap();
        assert_eq!(
            sample_answers(&w, &p, &plan, Seed(2)).unwrap(),
            sample_answers(&w, &p, &plan, Seed(2)).unwrap()
        );
        let mut bad = AssignmentPlan::new();
        bad.push(0, vec![7]).unwrap();
        assert!(matches!(sample_answers(&w, &p, &bad, Seed(2)), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(
            AssignmentPlan::new().push(0, vec![1, 1]),
            Err(Error::DuplicateWorker { task: 0, worker: 1 })
        ));
    }

    #[test]
    fn text_round_trip() {
        let p = params(3, 0.9, 0.6);
        let w = sample_world(&p, 20, 8, Seed(1)).unwrap();
        let plan = assign_uniform(8, &(0..20).collect::<Vec<_>>(), 4, Seed(2)).unwrap();
        let a = sample_answers(&w, &p, &plan, Seed(3)).unwrap();

        let mut buf = Vec::new();
        a.write_text(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("20 8 3 0.9 0.6\n"));
        let (p2, a2) = AnswerMatrix::read_text::<f64, _>(&buf[..]).unwrap();
        assert_eq!(p2, p);
        assert_eq!(a2, a);

        let mut buf = Vec::new();
        w.write_text(&p, &mut buf).unwrap();
        let (_, w2) = World::read_text::<f64, _>(&buf[..]).unwrap();
        assert_eq!(w2, w);
    }

    #[test]
    fn text_parse_errors() {
        let bad = "2 2 2 0.9 0.6\n0 0 3\n";
        assert!(matches!(
            AnswerMatrix::read_text::<f64, _>(bad.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad_header = "2 2 2 0.6 0.9\n";
        assert!(AnswerMatrix::read_text::<f64, _>(bad_header.as_bytes()).is_err());
    }
}
