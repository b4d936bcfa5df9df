//! Dense symmetric positive-definite kernels: Cholesky factorization and the
//! operations built on it, plus deliberately naive baselines used as oracles
//! and benchmark opponents.

use crate::matrix::{dot, Matrix};
use crate::rng::RngState;
use crate::tolerances::{EIGEN_CLAMP_ABS, PIVOT_MIN};

#[cfg(test)]
thread_local! {
    // Lets tests assert how many factorizations a routine performed on the
    // current thread without cross-test interference.
    pub(crate) static CHOLESKY_CALLS: std::cell::Cell<usize> =
        const { std::cell::Cell::new(0) };
}

/// Errors shared by the dense and Toeplitz linear algebra.
#[derive(Clone, Debug, PartialEq)]
pub enum LinAlgError {
    /// The matrix is not positive definite. For dense factorizations `index`
    /// is the 1-based order of the first failing leading principal minor;
    /// for the Toeplitz recursion it is the failing step k (|alpha_k| >= 1).
    NotPositiveDefinite {
        index: usize,
    },
    /// A pivot fell below [`PIVOT_MIN`]; `pivot` is its 0-based column.
    SingularMatrix {
        pivot: usize,
    },
    /// An LU determinant came out non-positive, so its log does not exist.
    NonPositiveDeterminant,
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
}

impl std::fmt::Display for LinAlgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LinAlgError::NotPositiveDefinite { index } => {
                write!(
                    f,
                    "matrix is not positive definite (failure at index {index})"
                )
            }
            LinAlgError::SingularMatrix { pivot } => {
                write!(f, "matrix is numerically singular (pivot column {pivot})")
            }
            LinAlgError::NonPositiveDeterminant => {
                write!(f, "determinant is not positive; log-determinant undefined")
            }
            LinAlgError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch (expected {expected}, found {found})")
            }
        }
    }
}

impl std::error::Error for LinAlgError {}

/// Dense symmetric matrix stored row-major, symmetric by construction.
/// Positive definiteness is certified lazily: `cholesky` either succeeds or
/// reports the failing leading minor.
#[derive(Clone, Debug, PartialEq)]
pub struct SymPdMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymPdMatrix {
    /// Builds from `f` evaluated on the upper triangle (`i <= j`) and
    /// mirrored, so the result is exactly symmetric.
    pub fn from_fn_symmetric(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymPdMatrix { n, data }
    }

    /// Builds from explicit rows; panics unless the input is square and
    /// exactly symmetric.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        assert!(n > 0, "matrix dimension must be positive");
        for row in &rows {
            assert_eq!(row.len(), n, "matrix must be square");
        }
        for i in 0..n {
            for j in i + 1..n {
                assert!(
                    rows[i][j] == rows[j][i],
                    "matrix must be exactly symmetric at ({i}, {j})"
                );
            }
        }
        SymPdMatrix::from_fn_symmetric(n, |i, j| rows[i][j])
    }

    pub fn identity(n: usize) -> Self {
        SymPdMatrix::from_fn_symmetric(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        SymPdMatrix::from_fn_symmetric(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub(crate) fn from_data(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        debug_assert!((0..n).all(|i| (i..n).all(|j| data[i * n + j] == data[j * n + i])));
        SymPdMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(self.n, self.n, self.data.clone())
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], x))
            .collect()
    }

    pub fn mul(&self, rhs: &SymPdMatrix) -> Matrix {
        self.to_matrix().mul(&rhs.to_matrix())
    }

    /// Validation hook for tests: exact symmetry plus a Cholesky probe.
    /// Ordinary call paths skip this; producers keep the invariants instead.
    pub fn validate(&self) -> Result<(), LinAlgError> {
        self.cholesky().map(|_| ())
    }

    /// Lower Cholesky factor `L` with `Σ = L·Lᵀ`. Fails with the 1-based
    /// order of the first non-positive-definite leading minor.
    pub fn cholesky(&self) -> Result<CholFactor, LinAlgError> {
        #[cfg(test)]
        CHOLESKY_CALLS.with(|c| c.set(c.get() + 1));
        let n = self.n;
        // Right-looking factorization of Σ = Uᵀ·U on the upper triangle:
        // the rank-1 downdates stream contiguous row tails, where the
        // dot-product form would serialize on reduction chains.
        let mut u = self.data.clone();
        for k in 0..n {
            let d = u[k * n + k];
            if d <= 0.0 || !d.is_finite() {
                return Err(LinAlgError::NotPositiveDefinite { index: k + 1 });
            }
            let d = d.sqrt();
            u[k * n + k] = d;
            let inv = 1.0 / d;
            for v in &mut u[k * n + k + 1..k * n + n] {
                *v *= inv;
            }
            let (top, rest) = u.split_at_mut((k + 1) * n);
            let urow = &top[k * n..];
            for i in k + 1..n {
                let c = urow[i];
                if c == 0.0 {
                    continue;
                }
                let base = (i - k - 1) * n;
                let row = &mut rest[base + i..base + n];
                for (v, &s) in row.iter_mut().zip(&urow[i..]) {
                    *v -= c * s;
                }
            }
        }
        // Stored as the lower factor L = Uᵀ, which the solves expect.
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                l[i * n + j] = u[j * n + i];
            }
        }
        Ok(CholFactor { n, l })
    }

    /// Inverse via the Cholesky factor: `Σ⁻¹ = L⁻ᵀ·L⁻¹`, computed on the
    /// upper triangle and mirrored so the result is exactly symmetric.
    pub fn invert(&self) -> Result<SymPdMatrix, LinAlgError> {
        let chol = self.cholesky()?;
        let n = self.n;
        let l = &chol.l;
        // minv = L⁻¹, row by row: m_i = (e_i − Σ_{k<i} L[i][k]·m_k) / L[i][i].
        // Every m_k is a finished contiguous row, so the updates stream.
        let mut minv = vec![0.0; n * n];
        let mut acc = vec![0.0; n];
        for i in 0..n {
            acc[..i].fill(0.0);
            acc[i] = 1.0;
            for k in 0..i {
                let c = l[i * n + k];
                if c == 0.0 {
                    continue;
                }
                let mk = &minv[k * n..k * n + k + 1];
                for (a, &b) in acc.iter_mut().zip(mk) {
                    *a -= c * b;
                }
            }
            let inv = 1.0 / l[i * n + i];
            for a in &mut acc[..=i] {
                *a *= inv;
            }
            minv[i * n..i * n + i + 1].copy_from_slice(&acc[..=i]);
        }
        // Σ⁻¹ = (L⁻¹)ᵀ·L⁻¹, accumulated row by row of L⁻¹ so every pass
        // streams contiguous memory, then mirrored onto the lower triangle.
        let mut out = vec![0.0; n * n];
        for k in 0..n {
            let row = &minv[k * n..k * n + k + 1];
            for i in 0..=k {
                let a = row[i];
                if a == 0.0 {
                    continue;
                }
                let dst = &mut out[i * n + i..i * n + k + 1];
                for (d, &s) in dst.iter_mut().zip(&row[i..]) {
                    *d += a * s;
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                out[j * n + i] = out[i * n + j];
            }
        }
        Ok(SymPdMatrix { n, data: out })
    }

    /// Log-determinant as `2·Σ log L[i][i]`; never forms the determinant.
    pub fn log_det(&self) -> Result<f64, LinAlgError> {
        Ok(self.cholesky()?.log_det())
    }
}

/// Lower-triangular Cholesky factor, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CholFactor {
    n: usize,
    l: Vec<f64>,
}

impl CholFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// `2·Σ log L[i][i]`, the log-determinant of the factored matrix.
    pub fn log_det(&self) -> f64 {
        (0..self.n)
            .map(|i| self.l[i * self.n + i].ln())
            .sum::<f64>()
            * 2.0
    }

    /// Solves `L·w = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut w = vec![0.0; n];
        for i in 0..n {
            let s = dot(&self.l[i * n..i * n + i], &w[..i]);
            w[i] = (b[i] - s) / self.l[i * n + i];
        }
        w
    }

    /// `L·z`, the affine transform that turns iid normals into draws.
    pub fn transform(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n);
        let n = self.n;
        (0..n)
            .map(|i| dot(&self.l[i * n..i * n + i + 1], &z[..i + 1]))
            .collect()
    }

    /// `L·Lᵀ`, for reconstruction checks.
    pub fn reconstruct(&self) -> SymPdMatrix {
        let n = self.n;
        SymPdMatrix::from_fn_symmetric(n, |i, j| {
            // Row i of L has i+1 entries; the overlap with row j is min+1.
            let m = i.min(j) + 1;
            dot(&self.l[i * n..i * n + m], &self.l[j * n..j * n + m])
        })
    }
}

/// Naive Gauss–Jordan inverse with partial pivoting. Shares no code with
/// [`SymPdMatrix::invert`] and exploits no structure; it exists as an oracle
/// and benchmark opponent.
pub fn baseline_invert(m: &SymPdMatrix) -> Result<SymPdMatrix, LinAlgError> {
    let n = m.n();
    let w = 2 * n;
    let mut aug = vec![0.0; n * w];
    for i in 0..n {
        aug[i * w..i * w + n].copy_from_slice(&m.data()[i * n..(i + 1) * n]);
        aug[i * w + n + i] = 1.0;
    }
    for col in 0..n {
        let (mut pivot_row, mut pivot_abs) = (col, aug[col * w + col].abs());
        for r in col + 1..n {
            let a = aug[r * w + col].abs();
            if a > pivot_abs {
                pivot_row = r;
                pivot_abs = a;
            }
        }
        if pivot_abs < PIVOT_MIN {
            return Err(LinAlgError::SingularMatrix { pivot: col });
        }
        if pivot_row != col {
            for k in 0..w {
                aug.swap(col * w + k, pivot_row * w + k);
            }
        }
        let inv_p = 1.0 / aug[col * w + col];
        for k in col..w {
            aug[col * w + k] *= inv_p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = aug[r * w + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..w {
                aug[r * w + k] -= factor * aug[col * w + k];
            }
        }
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n..(i + 1) * n].copy_from_slice(&aug[i * w + n..(i + 1) * w]);
    }
    // Gauss–Jordan does not preserve symmetry exactly; average it back.
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (data[i * n + j] + data[j * n + i]);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(SymPdMatrix { n, data })
}

/// Naive LU log-determinant with partial pivoting, recomputed from scratch
/// on every call. Oracle and benchmark opponent for `log_det`.
pub fn baseline_log_det(m: &SymPdMatrix) -> Result<f64, LinAlgError> {
    let n = m.n();
    let mut a = m.data().to_vec();
    let mut log_abs = 0.0;
    let mut negative = false;
    for col in 0..n {
        let (mut pivot_row, mut pivot_abs) = (col, a[col * n + col].abs());
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > pivot_abs {
                pivot_row = r;
                pivot_abs = v;
            }
        }
        if pivot_abs < PIVOT_MIN {
            return Err(LinAlgError::SingularMatrix { pivot: col });
        }
        if pivot_row != col {
            negative = !negative;
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
        }
        let pivot = a[col * n + col];
        if pivot < 0.0 {
            negative = !negative;
        }
        log_abs += pivot_abs.ln();
        for r in col + 1..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col + 1..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
        }
    }
    if negative {
        return Err(LinAlgError::NonPositiveDeterminant);
    }
    Ok(log_abs)
}

/// Draws `count` rows from N(mean, cov) via a symmetric Jacobi
/// eigendecomposition recomputed on every call. Eigenvalues in
/// `[-EIGEN_CLAMP_ABS, 0]` are clamped to zero; anything lower fails.
pub fn baseline_sample_eigen(
    mean: &[f64],
    cov: &SymPdMatrix,
    count: usize,
    rng: &mut RngState,
) -> Result<Matrix, LinAlgError> {
    let n = cov.n();
    if mean.len() != n {
        return Err(LinAlgError::DimensionMismatch {
            expected: n,
            found: mean.len(),
        });
    }
    let (mut eigenvalues, vectors) = jacobi_eigen(cov);
    for (i, ev) in eigenvalues.iter_mut().enumerate() {
        if *ev < -EIGEN_CLAMP_ABS {
            return Err(LinAlgError::NotPositiveDefinite { index: i + 1 });
        }
        *ev = ev.max(0.0);
    }
    let scales: Vec<f64> = eigenvalues.iter().map(|ev| ev.sqrt()).collect();
    let mut out = Matrix::zeros(count, n);
    for r in 0..count {
        let z = rng.standard_normal_vec(n);
        let row = out.row_mut(r);
        for i in 0..n {
            // x = mean + V·diag(sqrt(lambda))·z, with V's columns as eigenvectors.
            let mut s = 0.0;
            for k in 0..n {
                s += vectors.get(i, k) * scales[k] * z[k];
            }
            row[i] = mean[i] + s;
        }
    }
    Ok(out)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// `(eigenvalues, V)` with eigenvectors in V's columns, `A = V·Λ·Vᵀ`.
fn jacobi_eigen(m: &SymPdMatrix) -> (Vec<f64>, Matrix) {
    let n = m.n();
    let mut a = m.data().to_vec();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    if n == 1 {
        return (vec![a[0]], v);
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = (norm * 1e-15).max(f64::MIN_POSITIVE);
    // Jacobi converges quadratically; 50 cyclic sweeps is far beyond need.
    for _ in 0..50 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle from Numerical-Recipes-style stable formulas.
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
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
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| a[i * n + i]).collect();
    (eigenvalues, v)
}
