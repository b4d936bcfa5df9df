//! Squared-exponential covariance construction on time grids, in dense and
//! Toeplitz representations.
//!
//! On an evenly spaced grid both representations are built from the same
//! first-row values, so they agree exactly, entry for entry.

use crate::linalg::SymPdMatrix;
use crate::toeplitz::SymToeplitz;
use crate::tolerances::{DEFAULT_JITTER_FACTOR, EVEN_SPACING_REL};

#[derive(Clone, Debug, PartialEq)]
pub enum KernelError {
    /// The Toeplitz representation needs an evenly spaced grid.
    NotEvenlySpaced,
    /// A parameter or grid violated its domain; the message names it.
    InvalidParameter(&'static str),
}

impl std::fmt::Display for KernelError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelError::NotEvenlySpaced => {
                write!(f, "grid is not evenly spaced; Toeplitz form unavailable")
            }
            KernelError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl std::error::Error for KernelError {}

/// Squared-exponential kernel `k(t, t') = sigma²·exp(−(t−t')²/(2·phi²))`
/// plus `jitter` on the diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeKernelParams {
    sigma: f64,
    phi: f64,
    jitter: f64,
}

impl SeKernelParams {
    /// Kernel with the default diagonal jitter `1e-8·sigma²`. Without it,
    /// densely sampled grids lose positive definiteness in double precision.
    pub fn new(sigma: f64, phi: f64) -> Result<Self, KernelError> {
        Self::with_jitter(sigma, phi, DEFAULT_JITTER_FACTOR * sigma * sigma)
    }

    pub fn with_jitter(sigma: f64, phi: f64, jitter: f64) -> Result<Self, KernelError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(KernelError::InvalidParameter("sigma must be positive"));
        }
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(KernelError::InvalidParameter("phi must be positive"));
        }
        if !(jitter >= 0.0 && jitter.is_finite()) {
            return Err(KernelError::InvalidParameter("jitter must be non-negative"));
        }
        Ok(SeKernelParams { sigma, phi, jitter })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Kernel value at distance `d`, without jitter.
    pub fn value(&self, d: f64) -> f64 {
        self.sigma * self.sigma * (-(d * d) / (2.0 * self.phi * self.phi)).exp()
    }
}

/// Strictly ascending time points; records whether they are evenly spaced
/// (consecutive gaps equal within [`EVEN_SPACING_REL`] relative).
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
    evenly_spaced: bool,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, KernelError> {
        if points.is_empty() {
            return Err(KernelError::InvalidParameter("grid must be non-empty"));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(KernelError::InvalidParameter("grid points must be finite"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(KernelError::InvalidParameter(
                "grid must be strictly ascending",
            ));
        }
        let evenly_spaced = if points.len() < 3 {
            true
        } else {
            let reference = (points[points.len() - 1] - points[0]) / (points.len() - 1) as f64;
            points
                .windows(2)
                .all(|w| ((w[1] - w[0]) - reference).abs() <= EVEN_SPACING_REL * reference)
        };
        Ok(TimeGrid {
            points,
            evenly_spaced,
        })
    }

    /// `n` evenly spaced points from `start` to `end` inclusive.
    pub fn linspace(start: f64, end: f64, n: usize) -> Result<Self, KernelError> {
        if n == 0 {
            return Err(KernelError::InvalidParameter("grid must be non-empty"));
        }
        if n == 1 {
            return TimeGrid::new(vec![start]);
        }
        if !(end > start) {
            return Err(KernelError::InvalidParameter(
                "grid must be strictly ascending",
            ));
        }
        let step = (end - start) / (n - 1) as f64;
        TimeGrid::new((0..n).map(|i| start + i as f64 * step).collect())
    }

    /// Unit-spaced grid `0, 1, …, n−1`.
    pub fn unit(n: usize) -> Result<Self, KernelError> {
        if n == 0 {
            return Err(KernelError::InvalidParameter("grid must be non-empty"));
        }
        TimeGrid::new((0..n).map(|i| i as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty grids
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn evenly_spaced(&self) -> bool {
        self.evenly_spaced
    }

    /// The common gap of an evenly spaced grid with at least two points.
    pub fn spacing(&self) -> Option<f64> {
        if self.evenly_spaced && self.points.len() > 1 {
            Some(
                (self.points[self.points.len() - 1] - self.points[0])
                    / (self.points.len() - 1) as f64,
            )
        } else {
            None
        }
    }
}

// Covariance first row on an even grid; both representations share it.
fn se_first_row(grid: &TimeGrid, params: &SeKernelParams) -> Vec<f64> {
    let step = grid.spacing().unwrap_or(0.0);
    (0..grid.len())
        .map(|k| {
            let v = params.value(k as f64 * step);
            if k == 0 {
                v + params.jitter()
            } else {
                v
            }
        })
        .collect()
}

/// Dense covariance of the grid under `params`. On an evenly spaced grid the
/// entries are computed from lag distances so the result matches
/// [`se_covariance_toeplitz`] exactly.
pub fn se_covariance(grid: &TimeGrid, params: &SeKernelParams) -> SymPdMatrix {
    let n = grid.len();
    if grid.evenly_spaced() {
        let row = se_first_row(grid, params);
        SymPdMatrix::from_fn_symmetric(n, |i, j| row[j - i])
    } else {
        let t = grid.points();
        SymPdMatrix::from_fn_symmetric(n, |i, j| {
            let v = params.value(t[j] - t[i]);
            if i == j {
                v + params.jitter()
            } else {
                v
            }
        })
    }
}

/// Toeplitz covariance; requires an evenly spaced grid.
pub fn se_covariance_toeplitz(
    grid: &TimeGrid,
    params: &SeKernelParams,
) -> Result<SymToeplitz, KernelError> {
    if !grid.evenly_spaced() {
        return Err(KernelError::NotEvenlySpaced);
    }
    let row = se_first_row(grid, params);
    Ok(SymToeplitz::new(row).expect("sigma² + jitter is positive"))
}
