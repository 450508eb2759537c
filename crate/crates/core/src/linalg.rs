//! Small dense linear algebra.
//!
//! Everything here is sized for desk-scale problems: symmetric matrices of a
//! few hundred rows at most, stored densely in row-major order. Eigenpairs
//! come from the cyclic Jacobi method, which is slow for large `n` but
//! unconditionally stable and accurate to machine precision for the sizes
//! this crate works with.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Default tolerance for [`min_eigenpair`].
pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;

/// Maximum number of Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 10_000;

const SYMMETRY_TOL: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Dense symmetric `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, rejecting inputs that are not
    /// symmetric to within `1e-12` (scaled by the largest entry when it
    /// exceeds one).
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("matrix dimension must be positive"));
        }
        check_dim("SymMatrix::new", n * n, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("matrix has non-finite entries"));
        }
        let scale = data.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::arg(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(SymMatrix { n, data })
    }

    /// Builds a matrix from a closure, symmetrizing as it goes (the upper
    /// triangle wins).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { n, data }
    }

    /// Average of `a` and its transpose. Useful for numerically estimated
    /// Hessians.
    pub fn symmetrize(n: usize, a: &[f64]) -> Result<Self> {
        check_dim("SymMatrix::symmetrize", n * n, a.len())?;
        Ok(Self::from_fn(n, |i, j| 0.5 * (a[i * n + j] + a[j * n + i])))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// The matrix with its diagonal zeroed.
    pub fn off_diagonal(&self) -> SymMatrix {
        Self::from_fn(self.n, |i, j| if i == j { 0.0 } else { self.get(i, j) })
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_dim("SymMatrix::add", self.n, other.n)?;
        Ok(SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn add_identity(&self, c: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += c;
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|row| dot(row, v)).collect()
    }

    /// `vᵀ A v`
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// Dense `rows x cols` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::arg("matrix must have at least one row and column"));
        }
        check_dim("Matrix::new", rows * cols, data.len())?;
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::arg("matrix must have at least one row"));
        }
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim("Matrix::from_rows", c, row.len())?;
            data.extend_from_slice(row);
        }
        Matrix::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// `A q`
    pub fn mul_vec(&self, q: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.cols).map(|row| dot(row, q)).collect()
    }

    /// `Aᵀ w`
    pub fn tr_mul_vec(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (wi, row) in w.iter().zip(self.data.chunks_exact(self.cols)) {
            axpy(*wi, row, &mut out);
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }
}

/// Full eigendecomposition of a symmetric matrix. Eigenvalues are sorted in
/// ascending order; `vectors[k]` is the unit eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition.
pub fn symmetric_eigen(a: &SymMatrix) -> Result<SymEigen> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.frobenius_norm();
    let threshold = f64::EPSILON * scale;

    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[i * n + j] * m[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut converged = n == 1 || scale == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= MAX_SWEEPS {
            let best = (0..n).map(|i| m[i * n + i]).fold(f64::INFINITY, f64::min);
            return Err(Error::Numeric {
                message: format!("Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"),
                best_estimate: Some(best),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off(&m) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|k| v[k * n + j]).collect())
        .collect();
    Ok(SymEigen { values, vectors })
}

/// Smallest eigenvalue and a unit eigenvector for it.
///
/// The residual `‖Av − λv‖` is checked against `tol · (1 + ‖A‖_F)`; a
/// violation is reported as a numeric error carrying the estimate.
pub fn min_eigenpair(a: &SymMatrix, tol: f64) -> Result<(f64, Vec<f64>)> {
    if !(tol > 0.0) {
        return Err(Error::arg(format!("tolerance must be positive, got {tol}")));
    }
    let eig = symmetric_eigen(a)?;
    let lambda = eig.values[0];
    let v = eig.vectors.into_iter().next().expect("n >= 1");
    let av = a.mul_vec(&v);
    let resid = av
        .iter()
        .zip(&v)
        .map(|(x, y)| (x - lambda * y).powi(2))
        .sum::<f64>()
        .sqrt();
    if resid > tol * (1.0 + a.frobenius_norm()) {
        return Err(Error::Numeric {
            message: format!("eigenpair residual {resid:e} exceeds tolerance"),
            best_estimate: Some(lambda),
        });
    }
    Ok((lambda, v))
}

pub fn min_eigenvalue(a: &SymMatrix) -> Result<f64> {
    Ok(symmetric_eigen(a)?.values[0])
}

/// Largest absolute eigenvalue.
pub fn spectral_norm(a: &SymMatrix) -> Result<f64> {
    let eig = symmetric_eigen(a)?;
    Ok(eig.values[0].abs().max(eig.values[eig.values.len() - 1].abs()))
}

/// `Σᵢ wᵢ Hᵢ`
pub fn weighted_hessian(hessians: &[SymMatrix], w: &[f64]) -> Result<SymMatrix> {
    let first = hessians
        .first()
        .ok_or_else(|| Error::arg("need at least one matrix"))?;
    check_dim("weighted_hessian (weights)", hessians.len(), w.len())?;
    let n = first.n;
    let mut data = vec![0.0; n * n];
    for (h, &wi) in hessians.iter().zip(w) {
        check_dim("weighted_hessian (matrix size)", n, h.n)?;
        axpy(wi, &h.data, &mut data);
    }
    Ok(SymMatrix { n, data })
}

/// Solves `A x = b` for square `A` (row-major, `n x n`) by Gaussian
/// elimination with partial pivoting.
pub fn solve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    check_dim("solve", n * n, a.len())?;
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("non-empty range");
        if m[piv * n + col].abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::numeric("singular linear system"));
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = m[r * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let s: f64 = ((col + 1)..n).map(|k| m[col * n + k] * x[k]).sum();
        x[col] = (x[col] - s) / m[col * n + col];
    }
    Ok(x)
}
