//! Dense symmetric matrices and a cyclic Jacobi eigensolver.
//!
//! The coupling matrices this crate produces are small (a few dozen rows), so
//! a plain row-major `Vec<f64>` and the classic Jacobi rotation sweep are
//! both simpler and more than fast enough. Jacobi also delivers the
//! orthogonality and residual quality the evolution step depends on.

use crate::{Error, Result};

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Square zero matrix of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds an `n` x `n` matrix entry by entry.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Rebuilds a matrix from a row-major buffer. Fails if the buffer is not
    /// a perfect square of length `n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Format(format!(
                "expected {} matrix entries, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.n + j] = x;
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// The whole buffer, row-major.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the strictly off-diagonal part.
    pub fn off_diagonal_norm(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    let x = self.get(i, j);
                    sum += x * x;
                }
            }
        }
        sum.sqrt()
    }

    /// Checks `|a_ij - a_ji| <= tol` for every pair.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Eigendecomposition of a symmetric matrix. Column `k` of `vectors` is the
/// unit eigenvector for `values[k]`; values are sorted ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Hard cap on Jacobi sweeps. Convergence is quadratic once rotations get
/// small, so well-formed inputs finish in far fewer.
const MAX_SWEEPS: usize = 100;

/// Relative off-diagonal threshold: iteration stops once the off-diagonal
/// Frobenius norm drops below this times the input norm.
const OFF_DIAG_RTOL: f64 = 1e-12;

/// Diagonalizes a symmetric matrix with cyclic Jacobi rotations.
///
/// Sweeps the upper triangle in row order, rotating away each off-diagonal
/// entry, until the off-diagonal Frobenius norm falls below
/// `1e-12 * ||A||_F` or [`MAX_SWEEPS`] is hit, which reports
/// [`Error::NoConvergence`]. The input itself is not checked for symmetry;
/// only its upper triangle is read.
pub fn eigh_jacobi(m: &DenseMatrix) -> Result<Eigen> {
    let n = m.n();
    if n == 0 {
        return Ok(Eigen { values: Vec::new(), vectors: DenseMatrix::zeros(0) });
    }

    let mut a = m.clone();
    // Mirror the upper triangle so the sweep below can read either half.
    for i in 0..n {
        for j in (i + 1)..n {
            let x = a.get(i, j);
            a.set(j, i, x);
        }
    }
    let mut v = DenseMatrix::identity(n);
    let norm = a.frobenius_norm();
    let tol = OFF_DIAG_RTOL * norm;

    let mut converged = norm == 0.0 || a.off_diagonal_norm() <= tol;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                // For huge |theta| the quadratic formula would overflow;
                // fall back to its asymptotic form.
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a.get(p, p);
                let aqq = a.get(q, q);
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a.get(i, p);
                        let aiq = a.get(i, q);
                        let new_ip = aip - s * (aiq + tau * aip);
                        let new_iq = aiq + s * (aip - tau * aiq);
                        a.set(i, p, new_ip);
                        a.set(p, i, new_ip);
                        a.set(i, q, new_iq);
                        a.set(q, i, new_iq);
                    }
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip - s * (viq + tau * vip));
                    v.set(i, q, viq + s * (vip - tau * viq));
                }
            }
        }
        sweeps += 1;
        converged = a.off_diagonal_norm() <= tol;
    }

    if !converged {
        return Err(Error::NoConvergence { off_diag: a.off_diagonal_norm(), sweeps });
    }

    // Sort eigenpairs ascending by value, carrying columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| a.get(k, k)).collect();
    let mut vectors = DenseMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, dst, v.get(i, src));
        }
    }

    Ok(Eigen { values, vectors })
}
