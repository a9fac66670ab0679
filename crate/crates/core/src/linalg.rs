//! Dense row-major matrices, one-sided Jacobi SVD and a symmetric Jacobi
//! eigensolver. Sizes here are alphabet sizes, so everything is `O(n^3)`
//! per sweep without blocking.

use std::ops::{Index, IndexMut};

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sweep cap shared by both Jacobi iterations.
pub const MAX_SWEEPS: usize = 100;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// Matrix with entries `f(i, j)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors of equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::EmptyInput);
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(Error::EmptyInput);
        }
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    /// Builds a matrix from a row-major buffer.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Row `i`.
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copy of column `j`.
    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Rows as owned vectors.
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Kronecker product; row `(i1, i2)` maps to `i1 * other.rows + i2`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn set_col(&mut self, j: usize, v: &[T]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Serialize> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for row in self.data.chunks(self.cols.max(1)) {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}

/// Euclidean inner product.
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Thin singular value decomposition `A = U diag(s) V^T`.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// `m x k` left singular vectors, `k = min(m, n)`.
    pub u: Matrix<T>,
    /// Singular values in non-increasing order.
    pub s: Vec<T>,
    /// `n x k` right singular vectors.
    pub v: Matrix<T>,
}

/// Hestenes one-sided Jacobi on a matrix with `rows >= cols`.
/// Returns the column-orthogonalized matrix and the accumulated rotations.
fn hestenes<T: Real>(mut a: Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let (m, n) = (a.rows, a.cols);
    debug_assert!(m >= n);
    let mut v = Matrix::identity(n);
    let tol = T::lit(T::JACOBI_TOL);
    let two = T::lit(2.0);
    // Columns below this squared norm are numerically zero.
    let frob2: T = a.data.iter().map(|&x| x * x).sum();
    let negligible = frob2 * T::epsilon() * T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..m {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    alpha = alpha + x * x;
                    beta = beta + y * y;
                    gamma = gamma + x * y;
                }
                if gamma == T::zero() || alpha.min(beta) <= negligible || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * x - s * y;
                    a[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            if a.data.iter().chain(&v.data).any(|x| !x.is_finite()) {
                return Err(Error::NumericalFailure("non-finite entry in Jacobi sweep".into()));
            }
            return Ok((a, v));
        }
    }
    Err(Error::NumericalFailure(format!(
        "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
    )))
}

/// Orthonormalizes the columns of `u` in order. Columns whose residual
/// collapses are replaced by a completion of the basis.
fn orthonormalize_columns<T: Real>(u: &mut Matrix<T>, keep: usize) {
    let m = u.rows;
    let half = T::lit(0.5);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(u.cols);
    for j in 0..u.cols {
        let mut col = u.col(j);
        let start = norm(&col);
        let mut accept = j < keep && start > T::zero();
        if accept {
            for _ in 0..2 {
                project_out(&mut col, &basis);
            }
            let r = norm(&col);
            accept = r > half * start;
            if accept {
                col.iter_mut().for_each(|x| *x = *x / r);
            }
        }
        if !accept {
            col = complete_basis(m, &basis);
        }
        u.set_col(j, &col);
        basis.push(col);
    }
}

fn project_out<T: Real>(col: &mut [T], basis: &[Vec<T>]) {
    for b in basis {
        let c = dot(col, b);
        for (x, &y) in col.iter_mut().zip(b) {
            *x = *x - c * y;
        }
    }
}

/// Unit vector orthogonal to `basis`, built from the best standard basis vector.
fn complete_basis<T: Real>(m: usize, basis: &[Vec<T>]) -> Vec<T> {
    let mut best = vec![T::zero(); m];
    let mut best_norm = -T::one();
    for e in 0..m {
        let mut cand = vec![T::zero(); m];
        cand[e] = T::one();
        for _ in 0..2 {
            project_out(&mut cand, basis);
        }
        let r = norm(&cand);
        if r > best_norm {
            best_norm = r;
            best = cand;
        }
    }
    best.iter_mut().for_each(|x| *x = *x / best_norm);
    best
}

/// Splits the Hestenes output into sorted singular values, left vectors and
/// the permuted right vectors.
fn finish<T: Real>(a: Matrix<T>, mut v: Matrix<T>) -> (Matrix<T>, Vec<T>, Matrix<T>) {
    let n = a.cols;
    let mut s: Vec<T> = (0..n).map(|j| norm(&a.col(j))).collect();
    let mut u = a;
    // Selection sort keeps the permutation explicit and n is small.
    for i in 0..n {
        let mut best = i;
        for j in i + 1..n {
            if s[j] > s[best] {
                best = j;
            }
        }
        s.swap(i, best);
        u.swap_cols(i, best);
        v.swap_cols(i, best);
    }
    let floor = s.first().copied().unwrap_or(T::zero()) * T::epsilon();
    let keep = s.iter().take_while(|&&x| x > floor).count();
    for j in 0..keep {
        for i in 0..u.rows {
            u[(i, j)] = u[(i, j)] / s[j];
        }
    }
    orthonormalize_columns(&mut u, keep);
    (u, s, v)
}

/// Thin SVD by one-sided Jacobi.
pub fn svd<T: Real>(a: &Matrix<T>) -> Result<Svd<T>> {
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::EmptyInput);
    }
    if a.rows >= a.cols {
        let (rot, v) = hestenes(a.clone())?;
        let (u, s, v) = finish(rot, v);
        Ok(Svd { u, s, v })
    } else {
        let (rot, v) = hestenes(a.transpose())?;
        let (u, s, v) = finish(rot, v);
        Ok(Svd { u: v, s, v: u })
    }
}

/// Singular values and a complete orthonormal basis of right singular
/// vectors (`n x n`). When `rows < cols` the trailing values are zero and
/// their vectors span the null space.
pub fn right_singular_basis<T: Real>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::EmptyInput);
    }
    let padded = if a.rows >= a.cols {
        a.clone()
    } else {
        Matrix::from_fn(a.cols, a.cols, |i, j| if i < a.rows { a[(i, j)] } else { T::zero() })
    };
    let (rot, v) = hestenes(padded)?;
    let (_, s, v) = finish(rot, v);
    Ok((s, v))
}

/// Eigenvalues (non-increasing) and eigenvectors (columns) of a symmetric
/// matrix by cyclic Jacobi rotations.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    let n = a.rows;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if a.cols != n {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", a.rows, a.cols)));
    }
    let mut a = Matrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)]) * T::lit(0.5));
    let mut v = Matrix::identity(n);
    let scale = a.data.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
    let target = scale * T::epsilon();
    let two = T::lit(2.0);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (T::one() + theta * theta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }
    let mut vals: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    for i in 0..n {
        let mut best = i;
        for j in i + 1..n {
            if vals[j] > vals[best] {
                best = j;
            }
        }
        vals.swap(i, best);
        v.swap_cols(i, best);
    }
    Ok((vals, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Matrix<f64> {
        Matrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn reconstruct(d: &Svd<f64>) -> Matrix<f64> {
        let k = d.s.len();
        Matrix::from_fn(d.u.rows(), d.v.rows(), |i, j| {
            (0..k).map(|l| d.u[(i, l)] * d.s[l] * d.v[(j, l)]).sum()
        })
    }

    fn assert_orthonormal_cols(a: &Matrix<f64>, tol: f64) {
        let g = a.transpose().matmul(a).unwrap();
        assert!(g.max_abs_diff(&Matrix::identity(a.cols())) < tol, "{g:?}");
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, n) in &[(1, 1), (3, 3), (5, 2), (2, 5), (6, 4), (4, 6)] {
            let a = random(m, n, &mut rng);
            let d = svd(&a).unwrap();
            assert_eq!(d.s.len(), m.min(n));
            assert!(reconstruct(&d).max_abs_diff(&a) < 1e-12);
            assert_orthonormal_cols(&d.u, 1e-12);
            assert_orthonormal_cols(&d.v, 1e-12);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_completes_rank_deficient_bases() {
        // Rank one: outer product.
        let a = Matrix::from_fn(4, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 0.5));
        let d = svd(&a).unwrap();
        assert!(d.s[1] < 1e-12 && d.s[2] < 1e-12);
        assert_orthonormal_cols(&d.u, 1e-12);
        assert_orthonormal_cols(&d.v, 1e-12);
        assert!(reconstruct(&d).max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn singular_values_match_eigenvalues_of_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(5, 4, &mut rng);
        let d = svd(&a).unwrap();
        let (ev, _) = symmetric_eigen(&a.transpose().matmul(&a).unwrap()).unwrap();
        for (s, e) in d.s.iter().zip(&ev) {
            assert!((s * s - e).abs() < 1e-12);
        }
    }

    #[test]
    fn right_basis_spans_null_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(2, 5, &mut rng);
        let (s, v) = right_singular_basis(&a).unwrap();
        assert_eq!(s.len(), 5);
        assert_orthonormal_cols(&v, 1e-12);
        for (j, &sj) in s.iter().enumerate().skip(2) {
            assert!(sj < 1e-14);
            assert!(norm(&a.mul_vec(&v.col(j))) < 1e-12);
        }
    }

    #[test]
    fn symmetric_eigen_diagonalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random(5, 5, &mut rng);
        let a = b.transpose().matmul(&b).unwrap();
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        let rebuilt = Matrix::from_fn(5, 5, |i, j| (0..5).map(|l| vecs[(i, l)] * vals[l] * vecs[(j, l)]).sum());
        assert!(rebuilt.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn f32_svd_works() {
        let a: Matrix<f32> = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let d = svd(&a).unwrap();
        assert!((d.s[0] - 2.0).abs() < 1e-6 && (d.s[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kron_indexing() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k[(1, 0)], 1.0);
        assert_eq!(k[(2, 3)], 4.0);
        assert_eq!(k[(3, 2)], 4.0);
        assert_eq!(k[(0, 1)], 1.0);
    }
}
