//! Dense symmetric matrices and a cyclic Jacobi eigensolver.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense symmetric `n x n` matrix, stored in full row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds the matrix from the upper triangle of `f(i, j)`, `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Takes a full row-major buffer; fails unless it is exactly symmetric.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidDimension(format!("{} entries for {n}x{n}", data.len())));
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidDimension(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SymMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &SymMatrix<T>) -> T {
        self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> SymMatrix<T> {
        SymMatrix { n: self.n, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn zip_map(&self, other: &SymMatrix<T>, f: impl Fn(T, T) -> T) -> SymMatrix<T> {
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn distance(&self, other: &SymMatrix<T>) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiConfig<T> {
    /// Stop once the off-diagonal Frobenius mass drops below `tol * ||A||_F`.
    pub tol: T,
    pub max_sweeps: usize,
}

impl<T: Scalar> Default for JacobiConfig<T> {
    fn default() -> Self {
        JacobiConfig { tol: T::lit(1e-10), max_sweeps: 100 }
    }
}

/// Eigenvalues (unsorted) and eigenvectors; eigenvector `k` is column `k` of
/// the row-major `vectors` buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen<T> {
    pub n: usize,
    pub values: Vec<T>,
    pub vectors: Vec<T>,
    pub sweeps: usize,
}

impl<T: Scalar> SymmetricEigen<T> {
    pub fn vector_entry(&self, row: usize, k: usize) -> T {
        self.vectors[row * self.n + k]
    }

    /// Values sorted in descending order.
    pub fn sorted_values(&self) -> Vec<T> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        v
    }

    /// `sum_k g(lambda_k) v_k v_k^T`.
    pub fn reconstruct(&self, g: impl Fn(T) -> T) -> SymMatrix<T> {
        let weights: Vec<T> = self.values.iter().map(|&x| g(x)).collect();
        self.reconstruct_with(&weights)
    }

    /// `sum_k w_k v_k v_k^T`, skipping zero weights.
    pub fn reconstruct_with(&self, weights: &[T]) -> SymMatrix<T> {
        let n = self.n;
        let mut out = SymMatrix::zeros(n);
        for k in 0..n {
            let w = weights[k];
            if w.is_zero() {
                continue;
            }
            let data = out.data_mut();
            for i in 0..n {
                let vi = w * self.vectors[i * n + k];
                if vi.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = data[i * n + j] + vi * self.vectors[j * n + k];
                }
            }
        }
        out
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigen<T: Scalar>(a: &SymMatrix<T>, cfg: &JacobiConfig<T>) -> Result<SymmetricEigen<T>> {
    let n = a.n();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let work = a.as_slice().to_vec();
    jacobi_core(work, v, n, a.frobenius_norm(), cfg)
}

/// Like [`jacobi_eigen`], starting from an orthogonal basis (row-major, basis
/// vectors as columns) that approximately diagonalizes `a`. Converges in a
/// sweep or two when `a` is close to the matrix the basis came from.
pub fn jacobi_eigen_warm<T: Scalar>(
    a: &SymMatrix<T>,
    basis: &[T],
    cfg: &JacobiConfig<T>,
) -> Result<SymmetricEigen<T>> {
    let n = a.n();
    if basis.len() != n * n {
        return Err(Error::InvalidDimension("basis size mismatch".into()));
    }
    // work = V^T A V
    let av = matmul(a.as_slice(), basis, n);
    let mut work = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let vki = basis[k * n + i];
            if vki.is_zero() {
                continue;
            }
            let row = &av[k * n..(k + 1) * n];
            let out = &mut work[i * n..(i + 1) * n];
            for j in 0..n {
                out[j] = out[j] + vki * row[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = (work[i * n + j] + work[j * n + i]) / T::lit(2.0);
            work[i * n + j] = s;
            work[j * n + i] = s;
        }
    }
    jacobi_core(work, basis.to_vec(), n, a.frobenius_norm(), cfg)
}

fn matmul<T: Scalar>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.is_zero() {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] = orow[j] + aik * brow[j];
            }
        }
    }
    out
}

fn off_diagonal_norm<T: Scalar>(b: &[T], n: usize) -> T {
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + b[i * n + j] * b[i * n + j];
            }
        }
    }
    s.sqrt()
}

fn jacobi_core<T: Scalar>(
    mut b: Vec<T>,
    mut v: Vec<T>,
    n: usize,
    norm: T,
    cfg: &JacobiConfig<T>,
) -> Result<SymmetricEigen<T>> {
    // the requested tolerance may be below what the scalar type can resolve
    let tol = cfg.tol.max(T::epsilon() * T::from_count(4 * n.max(1)));
    let threshold = tol * norm;
    let two = T::lit(2.0);
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&b, n);
        if off <= threshold || norm.is_zero() {
            break;
        }
        if sweeps == cfg.max_sweeps {
            return Err(Error::Numerical(format!(
                "Jacobi did not converge in {} sweeps (off-diagonal {off}, threshold {threshold})",
                cfg.max_sweeps
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let bpq = b[p * n + q];
                if bpq.is_zero() {
                    continue;
                }
                let theta = (b[q * n + q] - b[p * n + p]) / (two * bpq);
                let t = if theta >= T::zero() {
                    T::one() / (theta + (theta * theta + T::one()).sqrt())
                } else {
                    -T::one() / (-theta + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let bkp = b[k * n + p];
                    let bkq = b[k * n + q];
                    b[k * n + p] = c * bkp - s * bkq;
                    b[k * n + q] = s * bkp + c * bkq;
                }
                for k in 0..n {
                    let bpk = b[p * n + k];
                    let bqk = b[q * n + k];
                    b[p * n + k] = c * bpk - s * bqk;
                    b[q * n + k] = s * bpk + c * bqk;
                }
                b[p * n + q] = T::zero();
                b[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..n).map(|i| b[i * n + i]).collect();
    Ok(SymmetricEigen { n, values, vectors: v, sweeps })
}

/// Euclidean projection of `y` onto `{x >= 0, sum(x) = total}`.
pub fn project_simplex<T: Scalar>(y: &[T], total: T) -> Vec<T> {
    if y.is_empty() {
        return Vec::new();
    }
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (k, &uk) in u.iter().enumerate() {
        cumsum = cumsum + uk;
        let candidate = (cumsum - total) / T::from_count(k + 1);
        if uk - candidate > T::zero() {
            theta = candidate;
        }
    }
    y.iter().map(|&x| (x - theta).max(T::zero())).collect()
}
