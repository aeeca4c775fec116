//! SDP-based worker clustering.
//!
//! The pipeline builds the similarity matrix `A = S^T S` (zero diagonal) from the
//! stage-one block, estimates within/cross edge densities from the two leading
//! eigenvalues, solves
//!
//! ```text
//! maximize <A - lambda J, X>  s.t.  X PSD, tr X = n, 0 <= X_ij <= 1
//! ```
//!
//! with ADMM, and rounds the solution into `d` clusters with k-medoids.

use rand::Rng;

use crate::cluster::{Clustering, StageOneBlock};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, jacobi_eigen_warm, project_simplex, JacobiConfig, SymMatrix};
use crate::model::ModelParams;
use crate::rng::{Seed, Stream};
use crate::scalar::Scalar;

/// `A = S^T S` with zeroed diagonal, for an `r x n` block of `+-1` answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityMatrix {
    r: usize,
    n: usize,
    data: Vec<i64>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn to_sym<T: Scalar>(&self) -> SymMatrix<T> {
        SymMatrix::from_fn(self.n, |i, j| T::lit(self.get(i, j) as f64))
    }
}

pub fn similarity_matrix(block: &StageOneBlock) -> SimilarityMatrix {
    let (r, n) = (block.r(), block.n());
    let mut data = vec![0i64; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            // agreements minus disagreements
            let v = r as i64 - 2 * block.disagreements(a, b) as i64;
            data[a * n + b] = v;
            data[b * n + a] = v;
        }
    }
    SimilarityMatrix { r, n, data }
}

/// Expected per-task answer product for same-type (`p_m`) and different-type
/// (`p_u`) worker pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityConstants<T> {
    pub p_m: T,
    pub p_u: T,
}

impl<T: Scalar> DensityConstants<T> {
    pub fn new(params: &ModelParams<T>) -> Self {
        let two = T::lit(2.0);
        let a = two * params.p() - T::one();
        let b = two * params.q() - T::one();
        let d = T::from_count(params.d());
        DensityConstants {
            p_m: (a * a + (d - T::one()) * b * b) / d,
            p_u: (two * a * b + (d - two) * b * b) / d,
        }
    }

    /// Admissible range `[r(p_m + 3p_u)/4, r(3p_m + p_u)/4]` for the tuning parameter.
    pub fn tuning_window(&self, r: usize) -> (T, T) {
        let r = T::from_count(r);
        let four = T::lit(4.0);
        let three = T::lit(3.0);
        (
            r * (self.p_m + three * self.p_u) / four,
            r * (three * self.p_m + self.p_u) / four,
        )
    }

    /// Stage-one task count `c1 d^2 (ln n)^2 / (p_m - p_u)^2` for exact recovery.
    pub fn recovery_tasks(&self, d: usize, n: usize, c1: T) -> T {
        let d = T::from_count(d);
        let ln_n = T::from_count(n).ln();
        let gap = self.p_m - self.p_u;
        c1 * d * d * ln_n * ln_n / (gap * gap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDensityEstimates<T> {
    pub lambda1: T,
    pub lambda2: T,
    pub p_hat_c: T,
    pub q_hat_c: T,
    pub lambda_tune: T,
}

/// The two algebraically largest eigenvalues, `lambda1 >= lambda2`.
pub fn top_two_eigenvalues<T: Scalar>(a: &SymMatrix<T>, cfg: &JacobiConfig<T>) -> Result<(T, T)> {
    if a.n() < 2 {
        return Err(Error::InvalidDimension("need n >= 2".into()));
    }
    let v = jacobi_eigen(a, cfg)?.sorted_values();
    Ok((v[0], v[1]))
}

pub fn estimate_edge_densities<T: Scalar>(
    a: &SymMatrix<T>,
    d: usize,
    cfg: &JacobiConfig<T>,
) -> Result<EdgeDensityEstimates<T>> {
    let n = a.n();
    if d == 0 || n <= d {
        return Err(Error::InvalidDimension(format!("need n > d, got n={n}, d={d}")));
    }
    let (lambda1, lambda2) = top_two_eigenvalues(a, cfg)?;
    let dd = T::from_count(d);
    let p_hat_c = (lambda1 + (dd - T::one()) * lambda2) / T::from_count(n - d);
    let q_hat_c = (lambda1 - lambda2) / T::from_count(n);
    Ok(EdgeDensityEstimates {
        lambda1,
        lambda2,
        p_hat_c,
        q_hat_c,
        lambda_tune: (p_hat_c + q_hat_c) / T::lit(2.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpConfig<T> {
    /// ADMM penalty, applied to the cost scaled to unit max-norm.
    pub penalty: T,
    /// Primal and dual residual tolerance, per unit of `n`.
    pub tol: T,
    pub max_iter: usize,
    pub jacobi: JacobiConfig<T>,
}

impl<T: Scalar> Default for SdpConfig<T> {
    fn default() -> Self {
        SdpConfig {
            penalty: T::one(),
            tol: T::lit(1e-4),
            max_iter: 2000,
            jacobi: JacobiConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution<T> {
    pub x: SymMatrix<T>,
    pub iterations: usize,
    pub primal_residual: T,
    pub dual_residual: T,
    pub converged: bool,
    /// `<A - lambda J, X>` at the returned point.
    pub objective: T,
    /// Best objective seen so far, one entry per iteration.
    pub objective_history: Vec<T>,
}

/// Objective `<A - lambda J, X>`.
pub fn sdp_objective<T: Scalar>(a: &SymMatrix<T>, lambda: T, x: &SymMatrix<T>) -> T {
    a.dot(x) - lambda * x.as_slice().iter().copied().sum::<T>()
}

/// ADMM on the split `X = Z`, with `X` in the PSD cone at trace `n` and `Z` in
/// the box. Because trace `n` and `X_ii <= 1` force a unit diagonal, the box
/// projection also pins the diagonal to 1; the feasible set is unchanged.
///
/// The returned matrix is always exactly feasible: the last PSD iterate is
/// rescaled to unit diagonal and mixed with the all-ones matrix to remove any
/// negative entries.
pub fn solve_sdp<T: Scalar>(a: &SymMatrix<T>, lambda: T, cfg: &SdpConfig<T>) -> Result<SdpSolution<T>> {
    let n = a.n();
    if n == 0 {
        return Err(Error::InvalidDimension("empty matrix".into()));
    }
    let cost = a.map(|v| v - lambda);
    let scale = cost
        .as_slice()
        .iter()
        .fold(T::zero(), |m, &v| m.max(v.abs()));
    let scale = if scale.is_zero() { T::one() } else { scale };
    let step = cost.map(|v| v / (scale * cfg.penalty));
    let nn = T::from_count(n);

    let mut z = SymMatrix::identity(n);
    let mut u = SymMatrix::zeros(n);
    let mut x = SymMatrix::identity(n);
    let mut basis: Vec<T> = SymMatrix::identity(n).as_slice().to_vec();
    let mut best = T::neg_infinity();
    let mut history = Vec::new();
    let (mut primal, mut dual) = (T::infinity(), T::infinity());
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iter {
        iterations += 1;
        let target = SymMatrix::from_fn(n, |i, j| z.get(i, j) - u.get(i, j) + step.get(i, j));
        let eig = jacobi_eigen_warm(&target, &basis, &cfg.jacobi)?;
        let mu = project_simplex(&eig.values, nn);
        x = eig.reconstruct_with(&mu);
        basis = eig.vectors;

        let z_prev = z;
        z = SymMatrix::from_fn(n, |i, j| {
            if i == j {
                T::one()
            } else {
                (x.get(i, j) + u.get(i, j)).max(T::zero()).min(T::one())
            }
        });
        u = SymMatrix::from_fn(n, |i, j| u.get(i, j) + x.get(i, j) - z.get(i, j));

        primal = x.distance(&z) / nn;
        dual = cfg.penalty * z.distance(&z_prev) / nn;
        best = best.max(sdp_objective(a, lambda, &x));
        history.push(best);
        if primal <= cfg.tol && dual <= cfg.tol {
            converged = true;
            break;
        }
    }

    let x = repair_feasibility(&x);
    Ok(SdpSolution {
        objective: sdp_objective(a, lambda, &x),
        x,
        iterations,
        primal_residual: primal,
        dual_residual: dual,
        converged,
        objective_history: history,
    })
}

/// Maps a PSD matrix to a nearby point with unit diagonal and entries in [0, 1],
/// preserving PSD.
fn repair_feasibility<T: Scalar>(x: &SymMatrix<T>) -> SymMatrix<T> {
    let n = x.n();
    let tiny = T::epsilon();
    let inv_sqrt: Vec<Option<T>> = (0..n)
        .map(|i| {
            let d = x.get(i, i);
            (d > tiny).then(|| T::one() / d.sqrt())
        })
        .collect();
    let mut y = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            return T::one();
        }
        match (inv_sqrt[i], inv_sqrt[j]) {
            (Some(a), Some(b)) => x.get(i, j) * a * b,
            // a zero diagonal entry of a PSD matrix means a zero row
            _ => T::zero(),
        }
    });
    let min = y.as_slice().iter().fold(T::zero(), |m, &v| m.min(v));
    if min < T::zero() {
        let t = -min / (T::one() - min);
        y = y.map(|v| (T::one() - t) * v + t);
    }
    y.map(|v| v.max(T::zero()).min(T::one()))
}

/// Rounds the SDP solution into exactly `d` clusters.
///
/// Rows are points under the L1 distance. Medoids are seeded by farthest-first
/// traversal from a random start, then refined by alternating assignment and
/// medoid updates for at most 20 sweeps.
pub fn extract_clusters_kmedoids<T: Scalar>(x: &SymMatrix<T>, d: usize, seed: Seed) -> Result<Clustering> {
    const MAX_SWEEPS: usize = 20;
    let n = x.n();
    if d == 0 || d > n {
        return Err(Error::InvalidDimension(format!("cannot form {d} clusters from {n} points")));
    }
    let mut dist = vec![T::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: T = x.row(i).iter().zip(x.row(j)).map(|(&a, &b)| (a - b).abs()).sum();
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    }
    let dd = |i: usize, j: usize| dist[i * n + j];

    let first = seed.rng(Stream::Medoids).gen_range(0..n);
    let mut medoids = vec![first];
    let mut nearest: Vec<T> = (0..n).map(|i| dd(i, first)).collect();
    while medoids.len() < d {
        let mut pick = None;
        for i in 0..n {
            if medoids.contains(&i) {
                continue;
            }
            if pick.is_none_or(|p: usize| nearest[i] > nearest[p]) {
                pick = Some(i);
            }
        }
        let p = pick.expect("d <= n leaves a candidate");
        medoids.push(p);
        for i in 0..n {
            nearest[i] = nearest[i].min(dd(i, p));
        }
    }

    let assign = |medoids: &[usize]| -> Vec<usize> {
        (0..n)
            .map(|i| {
                if let Some(k) = medoids.iter().position(|&m| m == i) {
                    return k;
                }
                let mut best = 0;
                for k in 1..medoids.len() {
                    if dd(i, medoids[k]) < dd(i, medoids[best]) {
                        best = k;
                    }
                }
                best
            })
            .collect()
    };

    let mut labels = assign(&medoids);
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for k in 0..d {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == k).collect();
            let cost = |c: usize| members.iter().map(|&i| dd(i, c)).sum::<T>();
            let mut best = medoids[k];
            let mut best_cost = cost(best);
            for &c in &members {
                let cc = cost(c);
                if cc < best_cost {
                    best = c;
                    best_cost = cc;
                }
            }
            if best != medoids[k] {
                medoids[k] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        labels = assign(&medoids);
    }
    Clustering::from_assignments(&labels)
}

/// Output of the SDP clustering pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpClustering<T> {
    pub clustering: Clustering,
    pub estimates: EdgeDensityEstimates<T>,
    /// `None` when `d = 1` and no SDP was needed.
    pub solution: Option<SdpSolution<T>>,
}

/// Similarity matrix, density estimates, SDP and k-medoids rounding.
pub fn cluster_workers_sdp<T: Scalar>(
    block: &StageOneBlock,
    d: usize,
    seed: Seed,
    cfg: &SdpConfig<T>,
) -> Result<SdpClustering<T>> {
    let a: SymMatrix<T> = similarity_matrix(block).to_sym();
    let estimates = estimate_edge_densities(&a, d, &cfg.jacobi)?;
    if d == 1 {
        return Ok(SdpClustering {
            clustering: Clustering::from_assignments(&vec![0; block.n()])?,
            estimates,
            solution: None,
        });
    }
    let solution = solve_sdp(&a, estimates.lambda_tune, cfg)?;
    let clustering = extract_clusters_kmedoids(&solution.x, d, seed)?;
    Ok(SdpClustering { clustering, estimates, solution: Some(solution) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assign_uniform, sample_answers, sample_world, Label};
    use approx::assert_relative_eq;

    fn block_for(params: &ModelParams<f64>, r: usize, n: usize, seed: Seed) -> (StageOneBlock, Vec<usize>) {
        let w = sample_world(params, r, n, seed).unwrap();
        let tasks: Vec<usize> = (0..r).collect();
        let plan = assign_uniform(n, &tasks, n, seed).unwrap();
        let a = sample_answers(&w, params, &plan, seed).unwrap();
        (StageOneBlock::from_answers(&a, &tasks).unwrap(), w.worker_types)
    }

    fn min_eigenvalue(x: &SymMatrix<f64>) -> f64 {
        jacobi_eigen(x, &JacobiConfig::default()).unwrap().sorted_values().last().copied().unwrap()
    }

    fn assert_feasible(sol: &SdpSolution<f64>) {
        let n = sol.x.n() as f64;
        assert!(sol.x.as_slice().iter().all(|&v| (-1e-6..=1.0 + 1e-6).contains(&v)));
        assert!((sol.x.trace() - n).abs() <= 1e-4 * n);
        assert!(min_eigenvalue(&sol.x) >= -1e-6 * n);
    }

    #[test]
    fn similarity_basics() {
        use Label::{Neg, Pos};
        let b = StageOneBlock::from_columns(&[
            vec![Pos, Neg, Pos, Neg],
            vec![Pos, Neg, Pos, Neg],
            vec![Pos, Pos, Neg, Neg],
        ])
        .unwrap();
        let a = similarity_matrix(&b);
        assert_eq!(a.get(0, 1), 4);
        assert_eq!(a.get(0, 2), 0);
        assert_eq!(a.get(1, 1), 0);
        assert_eq!(a.get(2, 0), a.get(0, 2));
    }

    #[test]
    fn similarity_parity_and_symmetry() {
        let p = ModelParams::new(3, 0.9, 0.6).unwrap();
        let (b, _) = block_for(&p, 37, 15, Seed(4));
        let a = similarity_matrix(&b);
        for i in 0..15 {
            assert_eq!(a.get(i, i), 0);
            for j in 0..15 {
                assert_eq!(a.get(i, j), a.get(j, i));
                if i != j {
                    assert!(a.get(i, j).abs() <= 37);
                    assert_eq!((a.get(i, j) - 37).rem_euclid(2), 0);
                }
            }
        }
    }

    #[test]
    fn pairwise_product_expectation() {
        // per-pair mean of A_ij / r over 1000 independent blocks of r = 20
        let params = ModelParams::new(3, 0.9, 0.6).unwrap();
        let k = DensityConstants::new(&params);
        let w_types = [0usize, 0, 1];
        let (mut same, mut diff) = (0.0, 0.0);
        let samples = 1000;
        let r = 20;
        for s in 0..samples {
            let w = sample_world(&params, r, 3, Seed(s)).unwrap();
            let w = crate::model::World::new(w.labels, w.task_types, w_types.to_vec(), 3).unwrap();
            let tasks: Vec<usize> = (0..r).collect();
            let plan = assign_uniform(3, &tasks, 3, Seed(s)).unwrap();
            let ans = sample_answers(&w, &params, &plan, Seed(s)).unwrap();
            let a = similarity_matrix(&StageOneBlock::from_answers(&ans, &tasks).unwrap());
            same += a.get(0, 1) as f64;
            diff += a.get(0, 2) as f64;
        }
        let total = (samples * r as u64) as f64;
        // each product is +-1, so the variance is at most 1 per task
        let tol = 3.0 / total.sqrt();
        assert!((same / total - k.p_m).abs() <= tol, "{} vs {}", same / total, k.p_m);
        assert!((diff / total - k.p_u).abs() <= tol, "{} vs {}", diff / total, k.p_u);
    }

    #[test]
    fn density_constants() {
        let k = DensityConstants::new(&ModelParams::new(3, 0.9, 0.6).unwrap());
        assert_relative_eq!(k.p_m, 0.24, max_relative = 1e-12);
        assert_relative_eq!(k.p_u, 0.12, max_relative = 1e-12);
        let (lo, hi) = k.tuning_window(100);
        assert_relative_eq!(lo, 15.0, max_relative = 1e-12);
        assert_relative_eq!(hi, 21.0, max_relative = 1e-12);
    }

    #[test]
    fn top_two_special_cases() {
        let cfg = JacobiConfig::default();
        assert_eq!(top_two_eigenvalues(&SymMatrix::<f64>::zeros(5), &cfg).unwrap(), (0.0, 0.0));
        let n = 9;
        let k = SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { 1.0 });
        let (l1, l2) = top_two_eigenvalues(&k, &cfg).unwrap();
        assert_relative_eq!(l1, 8.0, epsilon = 1e-9);
        assert_relative_eq!(l2, -1.0, epsilon = 1e-9);
        assert!(top_two_eigenvalues(&SymMatrix::<f64>::zeros(1), &cfg).is_err());
    }

    /// `r (p_u J + (p_m - p_u) blockdiag)` for `d` equal blocks of size `n / d`.
    fn expected_block(n: usize, d: usize, r: f64, pm: f64, pu: f64) -> SymMatrix<f64> {
        let size = n / d;
        SymMatrix::from_fn(n, |i, j| r * if i / size == j / size { pm } else { pu })
    }

    #[test]
    fn edge_density_block_oracle() {
        let (n, d, r, pm, pu) = (12, 3, 50.0, 0.24, 0.12);
        let a = expected_block(n, d, r, pm, pu);
        let e = estimate_edge_densities(&a, d, &JacobiConfig::default()).unwrap();
        let nf = n as f64;
        assert_relative_eq!(e.lambda1, r * (pu * nf + (pm - pu) * nf / 3.0), max_relative = 1e-9);
        assert_relative_eq!(e.lambda2, r * (pm - pu) * nf / 3.0, max_relative = 1e-9);
        assert_relative_eq!(e.p_hat_c, r * pm * nf / (nf - 3.0), max_relative = 1e-9);
        assert_relative_eq!(e.q_hat_c, r * pu, max_relative = 1e-9);
        assert_relative_eq!(e.lambda_tune, (e.p_hat_c + e.q_hat_c) / 2.0, max_relative = 1e-12);

        let zeroed = SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { a.get(i, j) });
        let e = estimate_edge_densities(&zeroed, d, &JacobiConfig::default()).unwrap();
        assert_relative_eq!(e.p_hat_c, r * pm, max_relative = 1e-9);
        assert_relative_eq!(e.q_hat_c, r * pu, max_relative = 1e-9);

        let one = estimate_edge_densities(&a, 1, &JacobiConfig::default()).unwrap();
        assert_relative_eq!(one.p_hat_c, one.lambda1 / (nf - 1.0), max_relative = 1e-12);
        assert!(estimate_edge_densities(&a, 12, &JacobiConfig::default()).is_err());
    }

    #[test]
    fn eigen_on_noiseless_block_matches_dense_oracle() {
        let a = expected_block(30, 3, 40.0, 0.24, 0.12);
        let a = SymMatrix::from_fn(30, |i, j| if i == j { 0.0 } else { a.get(i, j) });
        let (l1, l2) = top_two_eigenvalues(&a, &JacobiConfig::default()).unwrap();
        let m = nalgebra::DMatrix::from_row_slice(30, 30, a.as_slice());
        let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_relative_eq!(l1, v[0], max_relative = 1e-6);
        assert_relative_eq!(l2, v[1], max_relative = 1e-6);
    }

    #[test]
    fn two_block_sdp() {
        let r = 10.0;
        let a = SymMatrix::from_fn(4, |i, j| {
            if i == j {
                0.0
            } else if i / 2 == j / 2 {
                r
            } else {
                -r
            }
        });
        let sol = solve_sdp(&a, 0.0, &SdpConfig::default()).unwrap();
        let truth = SymMatrix::from_fn(4, |i, j| if i / 2 == j / 2 { 1.0 } else { 0.0 });
        assert!(sol.converged);
        assert!(sol.x.distance(&truth) <= 1e-3, "{:?}", sol.x);
        assert!(sol.objective >= sdp_objective(&a, 0.0, &truth) - 1e-3 * a.frobenius_norm());
        assert_feasible(&sol);
    }

    #[test]
    fn degenerate_objective_is_feasible() {
        let sol = solve_sdp(&SymMatrix::<f64>::zeros(6), 0.0, &SdpConfig::default()).unwrap();
        assert_feasible(&sol);
    }

    #[test]
    fn unconverged_solution_is_still_feasible() {
        let p = ModelParams::new(3, 0.9, 0.6).unwrap();
        let (b, _) = block_for(&p, 60, 20, Seed(8));
        let a: SymMatrix<f64> = similarity_matrix(&b).to_sym();
        let cfg = SdpConfig { max_iter: 3, ..SdpConfig::default() };
        let sol = solve_sdp(&a, 5.0, &cfg).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 3);
        assert_feasible(&sol);
    }

    #[test]
    fn noiseless_partition_objective_bound() {
        let (pm, pu) = (0.24, 0.12);
        let sizes = [0usize, 0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 2];
        let r = 100.0;
        let a = SymMatrix::from_fn(12, |i, j| {
            if i == j {
                0.0
            } else {
                r * if sizes[i] == sizes[j] { pm } else { pu }
            }
        });
        let lambda = r * (pm + pu) / 2.0;
        let sol = solve_sdp(&a, lambda, &SdpConfig::default()).unwrap();
        let truth = SymMatrix::from_fn(12, |i, j| if sizes[i] == sizes[j] { 1.0 } else { 0.0 });
        assert!(sol.objective >= sdp_objective(&a, lambda, &truth) - 1e-3 * a.frobenius_norm());
        assert!(sol.objective_history.windows(2).all(|w| w[1] >= w[0]));
        assert_feasible(&sol);
        let c = extract_clusters_kmedoids(&sol.x, 3, Seed(1)).unwrap();
        assert!(c.same_partition(&sizes));
    }

    #[test]
    fn kmedoids_on_exact_blocks() {
        let labels = [0usize, 1, 2, 0, 1, 2, 2, 0];
        let x = SymMatrix::from_fn(8, |i, j| if labels[i] == labels[j] { 1.0 } else { 0.0 });
        for s in 0..20 {
            let c = extract_clusters_kmedoids(&x, 3, Seed(s)).unwrap();
            assert!(c.same_partition(&labels));
        }
        let c = extract_clusters_kmedoids(&x, 8, Seed(0)).unwrap();
        assert_eq!(c.num_clusters(), 8);
        assert!(extract_clusters_kmedoids(&x, 9, Seed(0)).is_err());
    }

    #[test]
    fn pipeline_noiseless_and_single_type() {
        let p = ModelParams::new(2, 1.0, 0.5).unwrap();
        let (b, truth) = block_for(&p, 200, 16, Seed(11));
        let out = cluster_workers_sdp::<f64>(&b, 2, Seed(1), &SdpConfig::default()).unwrap();
        assert!(out.clustering.same_partition(&truth));

        let p1 = ModelParams::new(1, 0.9, 0.6).unwrap();
        let (b, _) = block_for(&p1, 50, 10, Seed(3));
        let out = cluster_workers_sdp::<f64>(&b, 1, Seed(1), &SdpConfig::default()).unwrap();
        assert_eq!(out.clustering.num_clusters(), 1);
        assert!(out.solution.is_none());
    }

    #[test]
    fn agrees_with_threshold_on_easy_instances() {
        let p = ModelParams::new(3, 0.95, 0.5).unwrap();
        let zeta = crate::budgets::stage1_recommendation(&p, 0.1, 24).unwrap().zeta;
        for s in 0..5 {
            let (b, truth) = block_for(&p, 1500, 24, Seed(100 + s));
            let sdp = cluster_workers_sdp::<f64>(&b, 3, Seed(s), &SdpConfig::default()).unwrap();
            let thr = crate::cluster::cluster_sequential(&b, zeta).unwrap();
            assert!(thr.same_partition(&truth));
            assert!(sdp.clustering.same_partition(thr.assignments()));
        }
    }
}
