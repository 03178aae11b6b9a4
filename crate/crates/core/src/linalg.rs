//! Dense real symmetric linear algebra.
//!
//! Only what the utility representation needs: inner products, a symmetric
//! matrix type and a cyclic Jacobi eigensolver. Dimensions are expected to be
//! small (tens, at most a few hundred).

use std::fmt;

use crate::error::{PeuError, Result};

/// Stop sweeping once the off-diagonal Frobenius norm falls below this,
/// relative to `max(1, ‖A‖_F)`.
pub const JACOBI_OFF_TOL: f64 = 1e-12;
/// Maximum number of full cyclic sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Rows of an eigenvector matrix must be orthonormal to this tolerance.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Relative tolerance under which a stored asymmetry is treated as rounding
/// noise and averaged away.
const SYMMETRY_TOL: f64 = 1e-12;

/// `Σ x_i y_i`.
pub fn inner(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(PeuError::DimensionMismatch {
            context: "inner product",
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(dot(x, y))
}

/// Unchecked inner product for callers that already validated lengths.
#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// A dense, exactly symmetric `n × n` real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from rows.
    ///
    /// Pairs that differ only by rounding noise are replaced by their
    /// average so that the stored matrix is exactly symmetric; anything
    /// larger is rejected.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(PeuError::Empty { context: "matrix" });
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(PeuError::NotSquare {
                    row: i,
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(PeuError::NonFinite {
                        context: "matrix",
                        index: i * n + j,
                        value: *v,
                    });
                }
            }
            data.extend(row);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let a = data[i * n + j];
                let b = data[j * n + i];
                if a != b {
                    let scale = 1f64.max(a.abs()).max(b.abs());
                    if (a - b).abs() > SYMMETRY_TOL * scale {
                        return Err(PeuError::NotSymmetric { i, j, a, b });
                    }
                    let mid = 0.5 * (a + b);
                    data[i * n + j] = mid;
                    data[j * n + i] = mid;
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds a symmetric matrix from the upper triangle produced by `f(i, j)`, `i <= j`.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_upper_fn(n, |_, _| 0.0)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_upper_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `true` when every off-diagonal entry is at most `tol` in magnitude.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.n).all(|i| ((i + 1)..self.n).all(|j| self.get(i, j).abs() <= tol))
    }

    /// `M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x, "matrix-vector product")?;
        Ok((0..self.n).map(|i| dot(self.row(i), x)).collect())
    }

    /// `x' M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x, "quadratic form")?;
        Ok(self.quadratic_form_unchecked(x))
    }

    #[inline]
    pub(crate) fn quadratic_form_unchecked(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += x[i] * dot(self.row(i), x);
        }
        acc
    }

    /// The principal submatrix on `indices` (in the given order).
    pub fn principal_submatrix(&self, indices: &[usize]) -> SymMatrix {
        let k = indices.len();
        Self::from_upper_fn(k, |a, b| self.get(indices[a], indices[b]))
    }

    /// `self += w * other`.
    pub fn add_scaled(&mut self, w: f64, other: &SymMatrix) -> Result<()> {
        if other.n != self.n {
            return Err(PeuError::DimensionMismatch {
                context: "matrix sum",
                expected: self.n,
                found: other.n,
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += w * b;
        }
        Ok(())
    }

    fn check_len(&self, x: &[f64], context: &'static str) -> Result<()> {
        if x.len() != self.n {
            return Err(PeuError::DimensionMismatch {
                context,
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.n).map(|i| self.row(i)))
            .finish()
    }
}

/// Eigenvalues in descending order with their eigenvectors as matching rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
}

impl SpectralDecomposition {
    /// Validates an externally supplied decomposition.
    ///
    /// The eigenvalues need not be sorted here; rows must be orthonormal.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Vec<Vec<f64>>) -> Result<Self> {
        check_orthonormal_rows(&eigenvectors)?;
        if eigenvalues.len() != eigenvectors.len() {
            return Err(PeuError::DimensionMismatch {
                context: "spectral decomposition",
                expected: eigenvectors.len(),
                found: eigenvalues.len(),
            });
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Row `k` pairs with `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<Vec<f64>>) {
        (self.eigenvalues, self.eigenvectors)
    }
}

/// Checks that `rows` form an orthonormal set of equal-length vectors spanning their space.
pub(crate) fn check_orthonormal_rows(rows: &[Vec<f64>]) -> Result<()> {
    let n = rows.len();
    if n == 0 {
        return Err(PeuError::Empty { context: "basis" });
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(PeuError::NotSquare {
                row: i,
                expected: n,
                found: r.len(),
            });
        }
        if let Some((k, v)) = r.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(PeuError::NonFinite {
                context: "basis",
                index: i * n + k,
                value: *v,
            });
        }
    }
    for i in 0..n {
        for j in i..n {
            let g = dot(&rows[i], &rows[j]);
            let target = if i == j { 1.0 } else { 0.0 };
            if (g - target).abs() > ORTHONORMAL_TOL {
                return Err(PeuError::NotOrthonormal { i, j, value: g });
            }
        }
    }
    Ok(())
}

/// Spectral decomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back in descending order. Each eigenvector has its first
/// component of magnitude above `1e-12` made positive. Within a repeated
/// eigenvalue the basis of the eigenspace is whatever the rotations produce.
pub fn eigh(m: &SymMatrix) -> Result<SpectralDecomposition> {
    let n = m.dim();
    let mut a = m.data.clone();
    // Columns of `v` accumulate the rotations, so column k is eigenvector k.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let threshold = JACOBI_OFF_TOL * 1f64.max(m.frobenius());
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(PeuError::ConvergenceFailure {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));

    let eigenvalues = order.iter().map(|&k| a[k * n + k]).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
            fix_sign(&mut col);
            col
        })
        .collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Flips `x` so its first component of magnitude above `1e-12` is positive.
pub(crate) fn fix_sign(x: &mut [f64]) {
    if let Some(first) = x.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            x.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

/// `P' D P`, i.e. `Σ_k λ_k p_k p_k'`.
pub fn reconstruct(d: &SpectralDecomposition) -> SymMatrix {
    let n = d.dim();
    SymMatrix::from_upper_fn(n, |i, j| {
        d.eigenvalues
            .iter()
            .zip(&d.eigenvectors)
            .map(|(l, p)| l * p[i] * p[j])
            .sum()
    })
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot vanishes.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[pivot][col].abs() > 1e-13 * scale) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
