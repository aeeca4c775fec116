//! Sequential threshold clustering from answers to a fully assigned task block.

use crate::cluster::Clustering;
use crate::error::{Error, Result};
use crate::model::{AnswerMatrix, Label};
use crate::scalar::Scalar;

/// Dense `r x n` block of answers: `r` tasks each answered by all `n` workers.
///
/// Columns are bit-packed (bit set means `+1`), so pairwise agreement counts
/// are popcounts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOneBlock {
    r: usize,
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl StageOneBlock {
    /// `columns[j][t]` is worker `j`'s answer to the `t`-th block task.
    pub fn from_columns(columns: &[Vec<Label>]) -> Result<Self> {
        let n = columns.len();
        if n == 0 {
            return Err(Error::InvalidDimension("block needs at least one worker".into()));
        }
        let r = columns[0].len();
        if columns.iter().any(|c| c.len() != r) {
            return Err(Error::InvalidDimension("ragged block columns".into()));
        }
        let words = r.div_ceil(64);
        let mut bits = vec![0u64; words * n];
        for (j, col) in columns.iter().enumerate() {
            for (t, &v) in col.iter().enumerate() {
                if v == Label::Pos {
                    bits[j * words + t / 64] |= 1 << (t % 64);
                }
            }
        }
        Ok(StageOneBlock { r, n, words, bits })
    }

    /// Extracts the block for `tasks`; every worker must have answered each.
    pub fn from_answers(answers: &AnswerMatrix, tasks: &[usize]) -> Result<Self> {
        let n = answers.n();
        let mut columns = vec![Vec::with_capacity(tasks.len()); n];
        for &i in tasks {
            let row = answers.task_answers(i);
            if row.len() != n {
                return Err(Error::InvalidDimension(format!(
                    "task {i} answered by {} of {n} workers",
                    row.len()
                )));
            }
            for &(j, v) in row {
                columns[j].push(v);
            }
        }
        Self::from_columns(&columns)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, task: usize, worker: usize) -> Label {
        let w = self.bits[worker * self.words + task / 64];
        if w >> (task % 64) & 1 == 1 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    fn column(&self, worker: usize) -> &[u64] {
        &self.bits[worker * self.words..(worker + 1) * self.words]
    }

    /// Number of block tasks on which the two workers disagree.
    pub fn disagreements(&self, a: usize, b: usize) -> usize {
        self.column(a)
            .iter()
            .zip(self.column(b))
            .map(|(x, y)| (x ^ y).count_ones() as usize)
            .sum()
    }
}

/// Fraction of block tasks on which workers `a` and `b` give the same answer.
pub fn agreement_fraction<T: Scalar>(block: &StageOneBlock, a: usize, b: usize) -> Result<T> {
    if a == b {
        return Err(Error::InvalidPair(a, b));
    }
    if a >= block.n() || b >= block.n() {
        return Err(Error::IndexOutOfRange(format!("worker pair ({a}, {b})")));
    }
    if block.r() == 0 {
        return Err(Error::InvalidDimension("empty block".into()));
    }
    let agree = block.r() - block.disagreements(a, b);
    Ok(T::from_count(agree) / T::from_count(block.r()))
}

/// Workers are visited in index order. Each joins the earliest-created cluster
/// whose every member agrees with it on more than a `zeta` fraction of tasks,
/// or starts a new cluster.
pub fn cluster_sequential<T: Scalar>(block: &StageOneBlock, zeta: T) -> Result<Clustering> {
    if !(zeta > T::zero() && zeta < T::one()) {
        return Err(Error::OutOfRange(format!("zeta = {zeta} outside (0, 1)")));
    }
    let r = T::from_count(block.r());
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for j in 0..block.n() {
        let agrees = |k: usize| T::from_count(block.r() - block.disagreements(j, k)) / r > zeta;
        match clusters.iter_mut().find(|c| c.iter().all(|&k| agrees(k))) {
            Some(c) => c.push(j),
            None => clusters.push(vec![j]),
        }
    }
    Clustering::from_clusters(clusters, block.n())
}
