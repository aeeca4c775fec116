//! Worker clustering: the shared [`Clustering`] partition type, the stage-one
//! answer block, and the two clustering procedures.

pub mod sdp;
pub mod threshold;

pub use threshold::{agreement_fraction, cluster_sequential, StageOneBlock};

use crate::error::{Error, Result};

/// Partition of workers `0..n` into clusters with dense ids `0..c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    assignments: Vec<usize>,
    clusters: Vec<Vec<usize>>,
}

impl Clustering {
    /// Builds a clustering from arbitrary per-worker labels. Cluster ids are
    /// renumbered in order of first appearance.
    pub fn from_assignments(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidDimension("empty clustering".into()));
        }
        let mut remap = std::collections::HashMap::new();
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut assignments = Vec::with_capacity(labels.len());
        for (j, &l) in labels.iter().enumerate() {
            let id = *remap.entry(l).or_insert_with(|| {
                clusters.push(Vec::new());
                clusters.len() - 1
            });
            clusters[id].push(j);
            assignments.push(id);
        }
        Ok(Clustering { assignments, clusters })
    }

    /// Builds a clustering from member lists, which must partition `0..n`.
    /// Empty lists are dropped.
    pub fn from_clusters(clusters: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (z, members) in clusters.iter().enumerate() {
            for &j in members {
                if j >= n {
                    return Err(Error::IndexOutOfRange(format!("worker {j} >= {n}")));
                }
                if labels[j] != usize::MAX {
                    return Err(Error::InvalidDimension(format!("worker {j} in two clusters")));
                }
                labels[j] = z;
            }
        }
        if let Some(j) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidDimension(format!("worker {j} unassigned")));
        }
        Self::from_assignments(&labels)
    }

    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn cluster_of(&self, worker: usize) -> usize {
        self.assignments[worker]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// True when both induce the same partition, regardless of cluster ids.
    pub fn same_partition(&self, labels: &[usize]) -> bool {
        if labels.len() != self.n() {
            return false;
        }
        let mut fwd = std::collections::HashMap::new();
        let mut back = std::collections::HashMap::new();
        for (&a, &b) in self.assignments.iter().zip(labels) {
            if *fwd.entry(a).or_insert(b) != b || *back.entry(b).or_insert(a) != a {
                return false;
            }
        }
        true
    }

    /// Adjusted Rand index against reference labels.
    pub fn adjusted_rand_index(&self, labels: &[usize]) -> f64 {
        assert_eq!(labels.len(), self.n(), "label length mismatch");
        let mut table = std::collections::HashMap::new();
        let mut rows = std::collections::HashMap::new();
        let mut cols = std::collections::HashMap::new();
        for (&a, &b) in self.assignments.iter().zip(labels) {
            *table.entry((a, b)).or_insert(0u64) += 1;
            *rows.entry(a).or_insert(0u64) += 1;
            *cols.entry(b).or_insert(0u64) += 1;
        }
        let c2 = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
        let index: f64 = table.values().map(|&x| c2(x)).sum();
        let sa: f64 = rows.values().map(|&x| c2(x)).sum();
        let sb: f64 = cols.values().map(|&x| c2(x)).sum();
        let total = c2(self.n() as u64);
        let expected = if total > 0.0 { sa * sb / total } else { 0.0 };
        let max = (sa + sb) / 2.0;
        if (max - expected).abs() < f64::EPSILON {
            return 1.0;
        }
        (index - expected) / (max - expected)
    }
}
