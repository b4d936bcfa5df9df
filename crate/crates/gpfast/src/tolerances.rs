//! Numeric thresholds shared by the library, its tests, and the CLI.
//!
//! Every tolerance lives here so the routine that promises a bound and the
//! test that checks it can never drift apart.

/// Relative tolerance for Cholesky reconstruction (`L·Lᵀ` against the input).
pub const CHOL_RECONSTRUCT_REL: f64 = 1e-10;

/// Max-abs tolerance for dense inverse identity checks (`Σ·Σ⁻¹ − I`),
/// n ≤ 256 and condition number ≤ 1e6.
pub const INVERSE_IDENTITY_ABS: f64 = 1e-8;

/// Max-abs tolerance for Trench inverse identity checks (`B·T − I`), n ≤ 512.
pub const TRENCH_IDENTITY_ABS: f64 = 1e-7;

/// Agreement between the fast log-determinant and a naive LU oracle.
pub const LOG_DET_AGREEMENT: f64 = 1e-8;

/// Relative agreement between Toeplitz and dense log-determinants.
pub const TOEPLITZ_LOG_DET_REL: f64 = 1e-8;

/// Pivots below this are treated as singular in the naive baselines.
pub const PIVOT_MIN: f64 = 1e-12;

/// Eigenvalues in `[-EIGEN_CLAMP_ABS, 0]` are clamped to zero when sampling;
/// anything more negative is a positive-definiteness failure.
pub const EIGEN_CLAMP_ABS: f64 = 1e-10;

/// A Durbin prediction-error variance below `NEAR_SINGULAR_BETA_REL · r0`
/// earns a conditioning warning alongside the result.
pub const NEAR_SINGULAR_BETA_REL: f64 = 1e-14;

/// Magnitudes below this are flushed to exact zero inside the Toeplitz
/// recursions. Two surviving operands multiply to at least 1e-300, still a
/// normal f64, so the recursions never produce subnormal intermediates
/// (each of which costs a microcode assist on common x86 cores). The
/// induced perturbation is absolutely bounded by this constant, more than
/// a hundred orders of magnitude below every accuracy bound in this file.
pub const SUBNORMAL_FLUSH_ABS: f64 = 1e-150;

/// Consecutive grid gaps equal to within this relative tolerance count as
/// evenly spaced.
pub const EVEN_SPACING_REL: f64 = 1e-12;

/// Default covariance jitter, as a multiple of sigma².
pub const DEFAULT_JITTER_FACTOR: f64 = 1e-8;

/// Absolute agreement between the dense and Toeplitz density paths.
pub const DENSITY_PATH_AGREEMENT_ABS: f64 = 1e-8;

/// Absolute agreement between the fast density and the naive baseline.
pub const DENSITY_BASELINE_AGREEMENT_ABS: f64 = 1e-9;

/// Relative tolerance for the Toeplitz inverse scaling law
/// (`inv(c·T) == inv(T)/c`).
pub const SCALING_LAW_REL: f64 = 1e-12;

/// Absolute tolerance for quadrature normalization of the density (n ≤ 2).
pub const QUADRATURE_ABS: f64 = 1e-4;

/// Hard cap on bracket shrinks within one elliptical slice sampling step.
pub const ESS_SHRINK_CAP: u32 = 10_000;

/// Complexity signature: max allowed growth of the Trench inverse median
/// time per doubling of n.
pub const TRENCH_DOUBLING_MAX: f64 = 4.5;

/// Complexity signature: min required growth of the dense baseline inverse
/// median time per doubling of n at the top sizes.
pub const BASELINE_DOUBLING_MIN: f64 = 6.0;
