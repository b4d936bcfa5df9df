//! Symmetric Toeplitz solvers: the Durbin recursion for Yule–Walker systems
//! and the Trench algorithm for O(n²) inversion and log-determinants.

use crate::linalg::{LinAlgError, SymPdMatrix};
use crate::tolerances::{NEAR_SINGULAR_BETA_REL, SUBNORMAL_FLUSH_ABS};

/// Replaces magnitudes below `SUBNORMAL_FLUSH_ABS` (including signed zeros)
/// with exact `+0.0`, so downstream products stay normal and zero terms are
/// recognizably zero. The perturbation is far below every accuracy bound.
#[inline]
fn flush_tiny(x: f64) -> f64 {
    if x.abs() < SUBNORMAL_FLUSH_ABS {
        0.0
    } else {
        x
    }
}

/// Symmetric Toeplitz matrix, stored as its first row. The leading entry
/// `r0` is positive by construction; full positive definiteness is certified
/// by the Durbin recursion on use.
#[derive(Clone, Debug, PartialEq)]
pub struct SymToeplitz {
    first_row: Vec<f64>,
}

/// Raised alongside a result when the recursion came close to losing
/// positive definiteness (some `beta_k < NEAR_SINGULAR_BETA_REL · r0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditioningWarning {
    /// Recursion step whose prediction-error variance was smallest.
    pub step: usize,
    /// That variance, relative to `r0`.
    pub beta_over_r0: f64,
}

/// Solution of the Yule–Walker system together with the prediction-error
/// variances `beta_0 = r0, beta_k = beta_{k-1}·(1 − alpha_k²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DurbinSolution {
    /// Solves `T_{n-1}(rho)·y = −(rho_1, …, rho_{n-1})` in normalized form.
    pub y: Vec<f64>,
    /// `n` strictly positive values; their product is `det T`.
    pub betas: Vec<f64>,
    /// Present when the matrix is near-singular rather than failing hard.
    pub warning: Option<ConditioningWarning>,
}

impl SymToeplitz {
    /// Builds from the first row; fails unless it is non-empty with
    /// `r0 > 0` (the order-1 leading minor).
    pub fn new(first_row: Vec<f64>) -> Result<Self, LinAlgError> {
        if first_row.is_empty() || !(first_row[0] > 0.0) {
            return Err(LinAlgError::NotPositiveDefinite { index: 1 });
        }
        Ok(SymToeplitz { first_row })
    }

    pub fn n(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    /// Expands to the dense representation, entry `(i, j) = r[|i − j|]`.
    pub fn materialize(&self) -> SymPdMatrix {
        SymPdMatrix::from_fn_symmetric(self.n(), |i, j| self.first_row[j - i])
    }

    /// Durbin recursion on the normalized row `rho_k = r_k / r0`, O(n²) time
    /// and O(n) extra space. Fails with the step k at which `|alpha_k| >= 1`,
    /// the certificate that the matrix is not positive definite.
    pub fn durbin(&self) -> Result<DurbinSolution, LinAlgError> {
        let n = self.n();
        let r0 = self.first_row[0];
        let mut betas = Vec::with_capacity(n);
        betas.push(r0);
        if n == 1 {
            return Ok(DurbinSolution {
                y: Vec::new(),
                betas,
                warning: None,
            });
        }
        let rho: Vec<f64> = self.first_row.iter().map(|r| flush_tiny(r / r0)).collect();
        // Rows with a short support (smooth kernels underflow to zero past a
        // few lags) shrink the dot below to its nonzero span; skipped terms
        // are exact +0 additions, so the result is unchanged bit for bit.
        let support = rho.iter().rposition(|r| *r != 0.0).expect("rho[0] == 1");
        let mut y = vec![0.0; n - 1];
        let mut beta = 1.0;
        for k in 1..n {
            let lim = (k - 1).min(support);
            let mut acc = rho[k];
            for (&r, &t) in rho[1..=lim].iter().zip(y[k - 1 - lim..k - 1].iter().rev()) {
                acc += r * t;
            }
            let alpha = flush_tiny(-acc / beta);
            // |alpha_k| < 1 is exactly the positive-definiteness certificate.
            if !(alpha.abs() < 1.0) {
                return Err(LinAlgError::NotPositiveDefinite { index: k });
            }
            // The update maps (y_j, y_{k-2-j}) to (y_j + alpha·y_{k-2-j},
            // y_{k-2-j} + alpha·y_j); rewriting each pair in place from its
            // old values needs no scratch row and no copy-back pass. A zero
            // alpha leaves y untouched, so the whole pass is skipped.
            if alpha != 0.0 {
                let m = k - 1;
                let (front, back) = y[..m].split_at_mut(m / 2);
                for (a, b) in front.iter_mut().zip(back.iter_mut().rev()) {
                    let (oa, ob) = (*a, *b);
                    *a = flush_tiny(oa + alpha * ob);
                    *b = flush_tiny(ob + alpha * oa);
                }
                if m % 2 == 1 {
                    let c = y[m / 2];
                    y[m / 2] = flush_tiny(c + alpha * c);
                }
            }
            y[k - 1] = alpha;
            beta *= 1.0 - alpha * alpha;
            betas.push(r0 * beta);
        }
        let (step, min_beta) = betas
            .iter()
            .enumerate()
            .skip(1)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("n >= 2");
        let warning = if *min_beta < NEAR_SINGULAR_BETA_REL * r0 {
            Some(ConditioningWarning {
                step,
                beta_over_r0: min_beta / r0,
            })
        } else {
            None
        };
        Ok(DurbinSolution { y, betas, warning })
    }

    /// Trench inverse in O(n²): row 0 is the Durbin solution vector
    /// v = (1, y_1, …, y_{n-1}) / beta_{n-1}; the wedge i <= j <= n-1-i is
    /// filled by the rank-2 displacement recurrence
    /// `B[i][j] = B[i-1][j-1] + (v_i·v_j − v_{n-i}·v_{n-j})·beta_{n-1}`,
    /// and every entry outside the wedge is a copy of its image in it, so
    /// the result is exactly symmetric and exactly persymmetric by
    /// construction. The mirror passes stream or tile so no loop strides by
    /// the row length.
    pub fn trench_invert(&self) -> Result<SymPdMatrix, LinAlgError> {
        let n = self.n();
        if n == 1 {
            let inv = 1.0 / self.first_row[0];
            return Ok(SymPdMatrix::from_fn_symmetric(1, |_, _| inv));
        }
        let sol = self.durbin()?;
        // First row and column of the inverse: v = (1, y) / beta_{n-1}.
        let beta_last = *sol.betas.last().expect("betas is non-empty");
        let mut v = vec![0.0; n];
        v[0] = 1.0 / beta_last;
        for i in 1..n {
            v[i] = flush_tiny(sol.y[i - 1] / beta_last);
        }
        // v reversed, so the wedge recurrence reads forward streams only.
        let vrev: Vec<f64> = v.iter().rev().copied().collect();
        let mut b = vec![0.0; n * n];
        // Row 0 of the inverse is v itself.
        b[..n].copy_from_slice(&v);
        // Wedge fill: only i <= j <= n-1-i is computed here, left to right,
        // so reads and writes both stream; vrev supplies v_{n-j}.
        for i in 1..=(n - 1) / 2 {
            let (head, rest) = b.split_at_mut(i * n);
            let prev = &head[(i - 1) * n + i - 1..(i - 1) * n + n - i - 1];
            let cur = &mut rest[i..n - i];
            let vi = v[i];
            let vni = v[n - i];
            let vj = &v[i..n - i];
            let vr = &vrev[i - 1..n - i - 1];
            for (((c, &p), &a), &r) in cur.iter_mut().zip(prev).zip(vj).zip(vr) {
                *c = p + (vi * a - vni * r) * beta_last;
            }
        }
        // Symmetry: mirror the wedge below the diagonal (j < i, i+j <= n-1)
        // in L1-sized tiles so neither side of the copy strides.
        const TILE: usize = 32;
        for bi in (1..n).step_by(TILE) {
            let mut bj = 0;
            while bj < (bi + TILE).min(n - bi) {
                for i in bi..(bi + TILE).min(n) {
                    let hi = (bj + TILE).min(i).min(n - i);
                    for j in bj..hi {
                        b[i * n + j] = b[j * n + i];
                    }
                }
                bj += TILE;
            }
        }
        // Persymmetry: the last i entries of row i are the first i entries
        // of row n-1-i reversed, which completes the matrix with streaming
        // copies.
        for i in 1..n {
            let src = n - 1 - i;
            if src == i {
                // Odd-n center row reflects its own prefix.
                let (head, tail) = b[i * n..(i + 1) * n].split_at_mut(i + 1);
                for (t, h) in tail.iter_mut().zip(head[..i].iter().rev()) {
                    *t = *h;
                }
                continue;
            }
            let (lo, hi) = if src < i {
                let (first, second) = b.split_at_mut(i * n);
                (&first[src * n..src * n + i], &mut second[n - i..n])
            } else {
                let (first, second) = b.split_at_mut(src * n);
                let (row_i, row_src) = (&mut first[i * n..], second);
                (&row_src[..i], &mut row_i[n - i..n])
            };
            for (t, h) in hi.iter_mut().zip(lo.iter().rev()) {
                *t = *h;
            }
        }
        Ok(SymPdMatrix::from_data(n, b))
    }

    /// Log-determinant as the sum of the log prediction-error variances,
    /// O(n²) time via the Durbin recursion.
    pub fn log_det(&self) -> Result<f64, LinAlgError> {
        let sol = self.durbin()?;
        Ok(sol.betas.iter().map(|b| b.ln()).sum())
    }
}
