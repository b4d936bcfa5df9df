//! Benchmark harness racing each fast path against its naive baseline on
//! SE-kernel covariance matrices over unit-spaced time points (sigma = phi
//! = 1), the configuration the package is built around.
//!
//! Timing protocol: one discarded warm-up run, then the median of `reps`
//! timed runs on a monotonic clock. Timings must not run concurrently.

use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gpfast::{
    baseline_ess_run, baseline_invert, baseline_log_det, baseline_log_dmvnorm,
    baseline_sample_eigen, ess_run, log_dmvnorm, log_dmvnorm_cached, rmvnorm, se_covariance,
    se_covariance_toeplitz, Covariance, EssConfig, InitialState, LogDensityCache, MvnParams,
    RngState, SeKernelParams, SymPdMatrix, SymToeplitz, TimeGrid,
};

use crate::CliError;

/// Frozen CSV schema; the column names are load-bearing for downstream
/// tooling and must not change.
pub const BENCH_HEADER: [&str; 7] = [
    "op",
    "baseline",
    "n",
    "reps",
    "fast_median_s",
    "base_median_s",
    "ratio",
];

/// Evaluation count for the cached-density amortization row.
pub const CACHED_EVALS: usize = 1_000;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// When false, kernel matrices are built without the diagonal nugget.
    pub jitter: bool,
    pub out: PathBuf,
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub op: &'static str,
    pub baseline: &'static str,
    pub n: usize,
    pub reps: usize,
    pub fast_median_s: f64,
    pub base_median_s: f64,
}

impl BenchRow {
    /// How many times faster the fast path ran; > 1 means it won.
    pub fn ratio(&self) -> f64 {
        self.base_median_s / self.fast_median_s
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Median wall time of `reps` runs after one discarded warm-up call.
pub fn median_time(reps: usize, mut work: impl FnMut()) -> f64 {
    assert!(reps >= 1);
    work();
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            work();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    }
}

fn kernel_params(jitter: bool) -> SeKernelParams {
    if jitter {
        SeKernelParams::new(1.0, 1.0).expect("unit parameters are valid")
    } else {
        SeKernelParams::with_jitter(1.0, 1.0, 0.0).expect("unit parameters are valid")
    }
}

fn se_pair(n: usize, jitter: bool) -> Result<(SymPdMatrix, SymToeplitz), CliError> {
    let grid = TimeGrid::unit(n)?;
    let params = kernel_params(jitter);
    let dense = se_covariance(&grid, &params);
    let toep = se_covariance_toeplitz(&grid, &params)?;
    Ok((dense, toep))
}

/// Times `trench_invert` against the dense Gauss-Jordan baseline at one
/// size. Shared with the complexity-signature check in the test suite.
pub fn trench_pair_times(n: usize, reps: usize, jitter: bool) -> Result<(f64, f64), CliError> {
    let (dense, toep) = se_pair(n, jitter)?;
    toep.trench_invert()?;
    baseline_invert(&dense)?;
    let fast = median_time(reps, || {
        black_box(toep.trench_invert().expect("validated before timing"));
    });
    let base = median_time(reps, || {
        black_box(baseline_invert(&dense).expect("validated before timing"));
    });
    Ok((fast, base))
}

/// Times `CACHED_EVALS` cached density evaluations (cache construction
/// included) against the same count of uncached evaluations, dense path.
pub fn cached_density_pair_times(
    n: usize,
    reps: usize,
    seed: u64,
    jitter: bool,
) -> Result<(f64, f64), CliError> {
    let (dense, _) = se_pair(n, jitter)?;
    let cov = Covariance::Dense(dense);
    let mu = vec![0.0; n];
    let params = MvnParams::new(mu.clone(), cov.clone())?;
    let mut rng = RngState::from_seed(seed);
    let xs: Vec<Vec<f64>> = (0..CACHED_EVALS)
        .map(|_| rng.standard_normal_vec(n))
        .collect();
    LogDensityCache::new(&cov)?;
    log_dmvnorm(&xs[0], &params)?;
    let fast = median_time(reps, || {
        let cache = LogDensityCache::new(&cov).expect("validated before timing");
        for x in &xs {
            black_box(log_dmvnorm_cached(x, &cache, &mu).expect("dimensions match"));
        }
    });
    let base = median_time(reps, || {
        for x in &xs {
            black_box(log_dmvnorm(x, &params).expect("validated before timing"));
        }
    });
    Ok((fast, base))
}

/// Iteration count for the ESS benchmark row, scaled down as n grows so the
/// eigendecomposition-per-draw baseline stays affordable.
pub fn ess_bench_iters(n: usize) -> usize {
    (4_000 / n).max(5)
}

fn bench_size(n: usize, reps: usize, seed: u64, jitter: bool) -> Result<Vec<BenchRow>, CliError> {
    let (dense, toep) = se_pair(n, jitter)?;
    let mu = vec![0.0; n];
    let dense_params = MvnParams::new(mu.clone(), Covariance::Dense(dense.clone()))?;
    let toep_params = MvnParams::new(mu.clone(), Covariance::Toeplitz(toep.clone()))?;
    let mut rng = RngState::from_seed(seed);
    let x = rng.standard_normal_vec(n);
    let mut rows = Vec::new();
    let mut push = |op, baseline, fast, base| {
        rows.push(BenchRow {
            op,
            baseline,
            n,
            reps,
            fast_median_s: fast,
            base_median_s: base,
        });
    };

    dense.invert()?;
    baseline_invert(&dense)?;
    let fast = median_time(reps, || {
        black_box(dense.invert().expect("validated before timing"));
    });
    let base = median_time(reps, || {
        black_box(baseline_invert(&dense).expect("validated before timing"));
    });
    push("invert", "baseline_invert", fast, base);

    let (fast, base) = trench_pair_times(n, reps, jitter)?;
    push("trench_invert", "baseline_invert", fast, base);

    toep.log_det()?;
    baseline_log_det(&dense)?;
    let fast = median_time(reps, || {
        black_box(toep.log_det().expect("validated before timing"));
    });
    let base = median_time(reps, || {
        black_box(baseline_log_det(&dense).expect("validated before timing"));
    });
    push("log_det", "baseline_log_det", fast, base);

    log_dmvnorm(&x, &toep_params)?;
    baseline_log_dmvnorm(&x, &dense_params)?;
    let fast = median_time(reps, || {
        black_box(log_dmvnorm(&x, &toep_params).expect("validated before timing"));
    });
    let base = median_time(reps, || {
        black_box(baseline_log_dmvnorm(&x, &dense_params).expect("validated before timing"));
    });
    push("log_dmvnorm_toeplitz", "baseline_log_dmvnorm", fast, base);

    log_dmvnorm(&x, &dense_params)?;
    let fast = median_time(reps, || {
        black_box(log_dmvnorm(&x, &dense_params).expect("validated before timing"));
    });
    let base = median_time(reps, || {
        black_box(baseline_log_dmvnorm(&x, &dense_params).expect("validated before timing"));
    });
    push("log_dmvnorm_dense", "baseline_log_dmvnorm", fast, base);

    let (fast, base) = cached_density_pair_times(n, reps, seed, jitter)?;
    push("log_dmvnorm_cached_1000x", "log_dmvnorm_1000x", fast, base);

    let mut fast_rng = RngState::from_seed(seed);
    let mut base_rng = RngState::from_seed(seed);
    rmvnorm(&dense_params, 1, &mut fast_rng)?;
    baseline_sample_eigen(&mu, &dense, 1, &mut base_rng)?;
    let fast = median_time(reps, || {
        black_box(rmvnorm(&dense_params, 1, &mut fast_rng).expect("validated before timing"));
    });
    let base = median_time(reps, || {
        black_box(
            baseline_sample_eigen(&mu, &dense, 1, &mut base_rng).expect("validated before timing"),
        );
    });
    push("rmvnorm", "baseline_sample_eigen", fast, base);

    let ess_config = EssConfig {
        n_iter: ess_bench_iters(n),
        burn_in: 0,
        prior: dense_params.clone(),
        seed,
        initial: InitialState::PriorDraw,
    };
    let loglik = |f: &[f64]| -0.5 * f.iter().map(|v| v * v).sum::<f64>();
    ess_run(loglik, &ess_config)?;
    baseline_ess_run(loglik, &ess_config)?;
    let fast = median_time(reps, || {
        black_box(ess_run(loglik, &ess_config).expect("validated before timing"));
    });
    let base = median_time(reps, || {
        black_box(baseline_ess_run(loglik, &ess_config).expect("validated before timing"));
    });
    push("ess_run", "baseline_ess_run", fast, base);

    Ok(rows)
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, CliError> {
    validate(config)?;
    let mut rows = Vec::new();
    for &n in &config.sizes {
        rows.extend(bench_size(n, config.reps, config.seed, config.jitter)?);
    }
    Ok(BenchReport { rows })
}

fn validate(config: &BenchConfig) -> Result<(), CliError> {
    if config.sizes.is_empty() {
        return Err(CliError::Usage("at least one size is required".into()));
    }
    if let Some(&bad) = config.sizes.iter().find(|&&n| n < 2) {
        return Err(CliError::Usage(format!("sizes must be >= 2, got {bad}")));
    }
    if config.reps < 3 {
        return Err(CliError::Usage(format!(
            "reps must be >= 3, got {}",
            config.reps
        )));
    }
    Ok(())
}

pub fn write_report(report: &BenchReport, path: &Path) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(BENCH_HEADER)?;
    for row in &report.rows {
        writer.write_record([
            row.op.to_string(),
            row.baseline.to_string(),
            row.n.to_string(),
            row.reps.to_string(),
            row.fast_median_s.to_string(),
            row.base_median_s.to_string(),
            format!("{:.3}", row.ratio()),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn cmd_bench(config: &BenchConfig) -> Result<BenchReport, CliError> {
    let report = run_bench(config)?;
    write_report(&report, &config.out)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_is_order_insensitive_and_positive() {
        let mut calls = 0u32;
        let t = median_time(3, || calls += 1);
        assert!(t >= 0.0);
        assert_eq!(calls, 4); // warm-up plus three timed runs
    }

    #[test]
    fn ratio_is_baseline_over_fast() {
        let row = BenchRow {
            op: "x",
            baseline: "y",
            n: 2,
            reps: 3,
            fast_median_s: 0.5,
            base_median_s: 2.0,
        };
        assert_eq!(row.ratio(), 4.0);
    }

    #[test]
    fn config_validation_rejects_bad_inputs() {
        let base = BenchConfig {
            sizes: vec![2],
            reps: 3,
            seed: 0,
            jitter: true,
            out: PathBuf::from("unused.csv"),
        };
        let mut no_sizes = base.clone();
        no_sizes.sizes.clear();
        assert_eq!(run_bench(&no_sizes).unwrap_err().exit_code(), 1);
        let mut tiny = base.clone();
        tiny.sizes = vec![1];
        assert_eq!(run_bench(&tiny).unwrap_err().exit_code(), 1);
        let mut few = base;
        few.reps = 2;
        assert_eq!(run_bench(&few).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn ess_iterations_scale_down_with_n() {
        assert_eq!(ess_bench_iters(2), 2_000);
        assert_eq!(ess_bench_iters(200), 20);
        assert_eq!(ess_bench_iters(4_000), 5);
        assert_eq!(ess_bench_iters(100_000), 5);
    }
}
