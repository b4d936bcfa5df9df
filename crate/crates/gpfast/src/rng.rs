//! Deterministic random stream: a ChaCha20 core with Box–Muller normals.
//!
//! The same seed yields the identical sequence of uniforms and normals on
//! every run, so sampled chains and CLI outputs are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Identifies the draw algorithm a stream was produced with.
pub const RNG_ALGORITHM: &str = "chacha20/box-muller";

/// Seeded random stream handed through all sampling routines.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    rng: ChaCha20Rng,
    // Box–Muller yields normals in pairs; the second is held here.
    spare_normal: Option<f64>,
}

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        RngState {
            seed,
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard normal draw via Box–Muller.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 − u lies in (0, 1], which keeps the log finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    pub fn standard_normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.standard_normal()).collect()
    }
}
