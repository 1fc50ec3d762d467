//! Dense matrices, symmetric storage, Cholesky factor-and-solve, and the
//! eigenvalue floor used to repair indefinite covariance estimates.
//!
//! Inverses are never formed explicitly; every `A^{-1} B` in the crate goes
//! through [`CholeskyFactor`].

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::ops::{Index, IndexMut};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `A^T A` as symmetric storage.
    pub fn gram(&self) -> SymmetricMatrix {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let vi = row[i];
                for j in i..n {
                    g[i * n + j] += vi * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[i * n + j] = g[j * n + i];
            }
        }
        SymmetricMatrix { dim: n, data: g }
    }

    /// `A^T v`.
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = self.row(r);
            let vr = v[r];
            for c in 0..self.cols {
                out[c] += row[c] * vr;
            }
        }
        out
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Dense symmetric matrix. Symmetry is exact: construction mirrors the upper
/// triangle or verifies equality entry by entry, and all entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>, // full row-major storage, kept exactly symmetric
}

impl SymmetricMatrix {
    /// Builds from a generator evaluated on the upper triangle (`i <= j`) and
    /// mirrored, so symmetry holds exactly whatever `f` does.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        assert!(dim > 0, "matrix dimension must be positive");
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::invalid(format!(
                        "symmetric matrix entry ({i}, {j}) is not finite"
                    )));
                }
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Ok(SymmetricMatrix { dim, data })
    }

    /// Builds from full storage, verifying exact symmetry.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("symmetric matrix storage must be square"));
        }
        for i in 0..dim {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Self::from_upper_fn(dim, |i, j| rows[i][j])
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_upper_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 }).unwrap()
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("diagonal must not be empty"));
        }
        Self::from_upper_fn(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean_diagonal(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum::<f64>() / self.dim as f64
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_upper_fn(self.dim, |i, j| c * self[(i, j)])
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self[(i, j)])
    }
}

impl Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * self.dim + j]
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L L^T`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    l: Vec<f64>, // row-major lower triangle, full square storage
}

/// Factors a symmetric positive definite matrix. On a non-positive pivot the
/// error reports which pivot failed.
///
/// A pivot that collapses below `1e-12` of the corresponding diagonal entry
/// is treated as a failure too: that only happens when the matrix is
/// numerically singular (for example an exactly duplicated design column,
/// where round-off can leave a pivot of either tiny sign).
pub fn cholesky(a: &SymmetricMatrix) -> Result<CholeskyFactor> {
    const REL_PIVOT_TOL: f64 = 1e-12;
    let n = a.dim;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !s.is_finite() || s <= REL_PIVOT_TOL * a[(i, i)].abs() {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(CholeskyFactor { dim: n, l })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `L z = b` (forward substitution).
    pub fn solve_lower_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim);
        let n = self.dim;
        let mut z = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                z[i] -= self.l[i * n + k] * z[k];
            }
            z[i] /= self.l[i * n + i];
        }
        z
    }

    /// Solves `L^T z = b` (back substitution).
    pub fn solve_upper_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim);
        let n = self.dim;
        let mut z = b.to_vec();
        for i in (0..n).rev() {
            for k in i + 1..n {
                z[i] -= self.l[k * n + i] * z[k];
            }
            z[i] /= self.l[i * n + i];
        }
        z
    }

    /// Solves `A z = b` with `A = L L^T`.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper_vec(&self.solve_lower_vec(b))
    }

    /// Solves `L Z = B` column-wise (whitening transform).
    pub fn solve_lower_mat(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.rows(), self.dim);
        let n = self.dim;
        let cols = b.cols();
        let mut z = b.clone();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[i * n + k];
                if lik != 0.0 {
                    for c in 0..cols {
                        let zk = z[(k, c)];
                        z[(i, c)] -= lik * zk;
                    }
                }
            }
            let lii = self.l[i * n + i];
            for c in 0..cols {
                z[(i, c)] /= lii;
            }
        }
        z
    }

    /// Solves `A Z = B` column by column.
    pub fn solve_mat(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.rows(), self.dim);
        let mut out = Matrix::zeros(b.rows(), b.cols());
        let mut col = vec![0.0; b.rows()];
        for c in 0..b.cols() {
            for r in 0..b.rows() {
                col[r] = b[(r, c)];
            }
            let z = self.solve_vec(&col);
            for r in 0..b.rows() {
                out[(r, c)] = z[r];
            }
        }
        out
    }

    /// `A^{-1}` as symmetric storage, via one solve per unit vector. Only
    /// used for small coefficient-covariance matrices.
    pub fn inverse(&self) -> Result<SymmetricMatrix> {
        let n = self.dim;
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            cols.push(self.solve_vec(&e));
            e[j] = 0.0;
        }
        // exact inverse is symmetric; average out substitution round-off
        SymmetricMatrix::from_upper_fn(n, |i, j| 0.5 * (cols[j][i] + cols[i][j]))
    }
}

/// Solves `A z = b` for symmetric positive definite `A`.
pub fn cholesky_solve(a: &SymmetricMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: matrix is {}x{} but right-hand side has length {}",
            a.dim(),
            a.dim(),
            b.len()
        )));
    }
    Ok(cholesky(a)?.solve_vec(b))
}

/// Solves `A Z = B` for symmetric positive definite `A`.
pub fn cholesky_solve_matrix(a: &SymmetricMatrix, b: &Matrix) -> Result<Matrix> {
    if b.rows() != a.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: matrix is {}x{} but right-hand side has {} rows",
            a.dim(),
            a.dim(),
            b.rows()
        )));
    }
    Ok(cholesky(a)?.solve_mat(b))
}

/// Symmetric eigendecomposition: eigenvalues plus a matrix whose column `k`
/// is the unit eigenvector for eigenvalue `k`. No ordering is guaranteed.
pub fn symmetric_eigen(a: &SymmetricMatrix) -> (Vec<f64>, Matrix) {
    let eig = a.to_nalgebra().symmetric_eigen();
    let n = a.dim;
    let values: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    let vectors = Matrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, k)]);
    (values, vectors)
}

/// Rebuilds `V diag(evals) V^T` from an eigendecomposition, exactly
/// symmetric.
pub fn eigen_reconstruct(evals: &[f64], vecs: &Matrix) -> Result<SymmetricMatrix> {
    let n = vecs.rows();
    assert_eq!(evals.len(), n);
    assert_eq!(vecs.cols(), n);
    let v = DMatrix::from_fn(n, n, |i, k| vecs[(i, k)]);
    let mut scaled = v.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= evals[k];
    }
    let rec = &scaled * v.transpose();
    SymmetricMatrix::from_upper_fn(n, |i, j| 0.5 * (rec[(i, j)] + rec[(j, i)]))
}

/// Eigenvalue floor: every eigenvalue below `eps_rel * lambda_max` is raised
/// to that level and the matrix is reconstructed, yielding a symmetric
/// positive definite result. When no eigenvalue is positive the result is
/// `sigma_bar^2 * I`, with `sigma_bar^2` the mean diagonal clamped below at
/// `eps_rel`.
///
/// Total on symmetric input: never fails. Inputs that are provably inside
/// the SPD cone are returned unchanged without an eigendecomposition: if
/// `A - eps_rel * G * I` admits a Cholesky factor, where `G` is the
/// Gershgorin upper bound on `lambda_max`, then every eigenvalue already
/// clears the floor.
pub fn spd_floor(a: &SymmetricMatrix, eps_rel: f64) -> SymmetricMatrix {
    assert!(
        eps_rel > 0.0 && eps_rel.is_finite(),
        "eps_rel must be positive"
    );
    let n = a.dim;
    let gershgorin = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    if gershgorin > 0.0 {
        let shift = eps_rel * gershgorin;
        let shifted =
            SymmetricMatrix::from_upper_fn(n, |i, j| a[(i, j)] - if i == j { shift } else { 0.0 })
                .expect("shift of a finite matrix is finite");
        if cholesky(&shifted).is_ok() {
            return a.clone();
        }
    }
    let (evals, vecs) = symmetric_eigen(a);
    let lambda_max = evals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lambda_max <= 0.0 {
        let sigma_bar = a.mean_diagonal().max(eps_rel);
        return SymmetricMatrix::from_upper_fn(n, |i, j| if i == j { sigma_bar } else { 0.0 })
            .expect("finite diagonal");
    }
    let floor = eps_rel * lambda_max;
    if evals.iter().all(|&l| l >= floor) {
        return a.clone();
    }
    // reconstruct sum_k max(l_k, floor) v_k v_k^T on the upper triangle,
    // which keeps symmetry exact
    let floored: Vec<f64> = evals.iter().map(|&l| l.max(floor)).collect();
    SymmetricMatrix::from_upper_fn(n, |i, j| {
        (0..n)
            .map(|k| floored[k] * vecs[(i, k)] * vecs[(j, k)])
            .sum()
    })
    .expect("reconstruction of a finite matrix is finite")
}
