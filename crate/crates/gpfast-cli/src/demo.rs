//! Warped-signal inference demo: observe s = A·sin((t + w)/T) + noise where
//! the warping w is a draw from a zero-mean squared-exponential GP, then
//! recover w from s by elliptical slice sampling under that same prior.
//!
//! Outputs four CSV files (truth, observations, posterior summary, snapshot
//! iterations) whose bytes are a pure function of the configuration.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use gpfast::{
    ess_run, log_dmvnorm_cached, rmvnorm, se_covariance, Covariance, EssChain, EssConfig,
    InitialState, LogDensityCache, MvnParams, RngState, SeKernelParams, TimeGrid,
};

use crate::CliError;

/// The recorded MCMC iterations (1-based), fixed by the demo's contract.
pub const SNAPSHOT_ITERATIONS: [usize; 6] = [100, 300, 500, 700, 900, 1_000];

/// Files `write_outputs` creates inside the output directory.
pub const DEMO_FILES: [&str; 4] = [
    "truth.csv",
    "observations.csv",
    "posterior_summary.csv",
    "snapshots.csv",
];

/// Added to the synthesis seed to derive the sampler's stream, so the chain
/// does not start at the state that generated the data. Public so the chain
/// can be reproduced through the library API.
pub const ESS_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Independent chains per inference. The sine observation is branch
/// symmetric (sin θ = sin(π − θ)), so a single chain can converge to a
/// reflected warping the prior disfavors; the reported chain is the one
/// whose final state has the highest log posterior density.
pub const ESS_RESTARTS: usize = 3;

/// Stride between per-chain sampler seeds.
pub const ESS_CHAIN_STRIDE: u64 = 0xBF58_476D_1CE4_E5B9;

/// Sampler seed of ensemble chain `chain_index` for a demo seed.
pub fn chain_seed(seed: u64, chain_index: usize) -> u64 {
    seed.wrapping_add(ESS_SEED_OFFSET)
        .wrapping_add((chain_index as u64).wrapping_mul(ESS_CHAIN_STRIDE))
}

/// Initial state of ensemble chain `chain_index`: the prior mean for the
/// first chain, fresh prior draws for the rest.
pub fn chain_initial(chain_index: usize, n: usize) -> InitialState {
    if chain_index == 0 {
        InitialState::Fixed(vec![0.0; n])
    } else {
        InitialState::PriorDraw
    }
}

/// Log posterior density (likelihood plus prior) of a chain's final state,
/// the ensemble selection score.
pub fn final_state_log_posterior(
    chain: &EssChain,
    cache: &LogDensityCache,
    prior_mu: &[f64],
) -> Result<f64, CliError> {
    let last = chain.n_retained() - 1;
    let prior_term = log_dmvnorm_cached(chain.samples.row(last), cache, prior_mu)?;
    Ok(chain.loglik_trace[last] + prior_term)
}

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub n: usize,
    pub iters: usize,
    pub seed: u64,
    pub amplitude: f64,
    pub period: f64,
    pub noise_sd: f64,
    pub sigma: f64,
    pub phi: f64,
    pub out_dir: PathBuf,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            n: 100,
            iters: 1_000,
            seed: 42,
            amplitude: 1.0,
            period: 1.0,
            noise_sd: 0.001,
            sigma: 1.0,
            phi: 1.0,
            out_dir: PathBuf::from("demo-out"),
        }
    }
}

/// The generative model: a latent warping drawn from an SE-kernel GP on the
/// grid, observed through a sinusoid plus Gaussian noise.
#[derive(Clone, Debug)]
pub struct WarpedSignalModel {
    amplitude: f64,
    period: f64,
    noise_sd: f64,
    grid: TimeGrid,
    kernel: SeKernelParams,
}

impl WarpedSignalModel {
    pub fn new(
        amplitude: f64,
        period: f64,
        noise_sd: f64,
        grid: TimeGrid,
        kernel: SeKernelParams,
    ) -> Result<Self, CliError> {
        if !(period > 0.0) {
            return Err(CliError::Usage(format!("period must be > 0, got {period}")));
        }
        if !(noise_sd > 0.0) {
            return Err(CliError::Usage(format!(
                "noise-sd must be > 0, got {noise_sd}"
            )));
        }
        if !amplitude.is_finite() {
            return Err(CliError::Usage(format!(
                "amplitude must be finite, got {amplitude}"
            )));
        }
        Ok(WarpedSignalModel {
            amplitude,
            period,
            noise_sd,
            grid,
            kernel,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Zero-mean SE prior over the warping.
    pub fn prior(&self) -> Result<MvnParams, CliError> {
        let cov = se_covariance(&self.grid, &self.kernel);
        Ok(MvnParams::new(
            vec![0.0; self.grid.len()],
            Covariance::Dense(cov),
        )?)
    }

    /// Noise-free signal A·sin((t + w)/T) for a given warping.
    pub fn fitted(&self, w: &[f64]) -> Vec<f64> {
        self.grid
            .points()
            .iter()
            .zip(w)
            .map(|(t, wi)| self.amplitude * ((t + wi) / self.period).sin())
            .collect()
    }

    /// Gaussian observation log-likelihood of warping `w` given signal `s`.
    pub fn log_likelihood(&self, s: &[f64], w: &[f64]) -> f64 {
        let fit = self.fitted(w);
        let var = self.noise_sd * self.noise_sd;
        let n = s.len() as f64;
        let sq: f64 = s.iter().zip(&fit).map(|(a, b)| (a - b) * (a - b)).sum();
        -0.5 * (n * (TAU * var).ln() + sq / var)
    }

    /// Draws a warping from the prior and the noisy signal it produces.
    pub fn synthesize(&self, rng: &mut RngState) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let prior = self.prior()?;
        let truth = rmvnorm(&prior, 1, rng)?.row(0).to_vec();
        let obs = self
            .fitted(&truth)
            .into_iter()
            .map(|v| v + self.noise_sd * rng.standard_normal())
            .collect();
        Ok((truth, obs))
    }
}

#[derive(Clone, Debug)]
pub struct DemoOutput {
    pub t: Vec<f64>,
    pub truth_w: Vec<f64>,
    pub obs_s: Vec<f64>,
    pub post_mean: Vec<f64>,
    pub post_lo2sd: Vec<f64>,
    pub post_hi2sd: Vec<f64>,
    /// `(iteration, warping sample)` pairs, one per snapshot iteration.
    pub snapshots: Vec<(usize, Vec<f64>)>,
}

fn build_model(config: &DemoConfig) -> Result<WarpedSignalModel, CliError> {
    if config.n < 2 {
        return Err(CliError::Usage(format!("n must be >= 2, got {}", config.n)));
    }
    let max_snapshot = *SNAPSHOT_ITERATIONS.last().expect("non-empty");
    if config.iters < max_snapshot {
        return Err(CliError::Usage(format!(
            "iters must be >= {max_snapshot} to cover every snapshot iteration, got {}",
            config.iters
        )));
    }
    let grid = TimeGrid::linspace(0.0, TAU, config.n)?;
    let kernel = SeKernelParams::new(config.sigma, config.phi)?;
    WarpedSignalModel::new(
        config.amplitude,
        config.period,
        config.noise_sd,
        grid,
        kernel,
    )
}

/// Runs synthesis and inference; pure in the configuration, touches no
/// files. `cmd_demo` adds the CSV writing.
pub fn run_inference(config: &DemoConfig) -> Result<DemoOutput, CliError> {
    let model = build_model(config)?;
    let mut synth_rng = RngState::from_seed(config.seed);
    let (truth_w, obs_s) = model.synthesize(&mut synth_rng)?;
    let prior = model.prior()?;
    let cache = LogDensityCache::new(prior.cov())?;
    let mut best: Option<(f64, EssChain)> = None;
    for k in 0..ESS_RESTARTS {
        let ess_config = EssConfig {
            n_iter: config.iters,
            burn_in: 0,
            prior: prior.clone(),
            seed: chain_seed(config.seed, k),
            initial: chain_initial(k, config.n),
        };
        let obs_for_ll = obs_s.clone();
        let model_for_ll = model.clone();
        let chain = ess_run(
            move |w: &[f64]| model_for_ll.log_likelihood(&obs_for_ll, w),
            &ess_config,
        )?;
        let score = final_state_log_posterior(&chain, &cache, prior.mu())?;
        // Strict > keeps the earliest chain on ties, so selection is
        // deterministic.
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, chain));
        }
    }
    let (_, chain) = best.expect("ESS_RESTARTS >= 1");
    let post_mean = chain.mean_per_dim();
    let post_sd: Vec<f64> = chain.var_per_dim().iter().map(|v| v.sqrt()).collect();
    let post_lo2sd: Vec<f64> = post_mean
        .iter()
        .zip(&post_sd)
        .map(|(m, s)| m - 2.0 * s)
        .collect();
    let post_hi2sd: Vec<f64> = post_mean
        .iter()
        .zip(&post_sd)
        .map(|(m, s)| m + 2.0 * s)
        .collect();
    // burn_in is 0, so retained row k holds 1-based iteration k + 1.
    let snapshots = SNAPSHOT_ITERATIONS
        .iter()
        .map(|&it| (it, chain.samples.row(it - 1).to_vec()))
        .collect();
    Ok(DemoOutput {
        t: model.grid().points().to_vec(),
        truth_w,
        obs_s,
        post_mean,
        post_lo2sd,
        post_hi2sd,
        snapshots,
    })
}

fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_outputs(output: &DemoOutput, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let n = output.t.len();
    let idx = |i: usize| i.to_string();

    write_csv(
        &dir.join("truth.csv"),
        &["index", "t", "truth_w"].map(String::from),
        (0..n).map(|i| {
            vec![
                idx(i),
                output.t[i].to_string(),
                output.truth_w[i].to_string(),
            ]
        }),
    )?;
    write_csv(
        &dir.join("observations.csv"),
        &["index", "t", "obs_s"].map(String::from),
        (0..n).map(|i| vec![idx(i), output.t[i].to_string(), output.obs_s[i].to_string()]),
    )?;
    write_csv(
        &dir.join("posterior_summary.csv"),
        &[
            "index",
            "t",
            "truth_w",
            "obs_s",
            "post_mean",
            "post_lo2sd",
            "post_hi2sd",
        ]
        .map(String::from),
        (0..n).map(|i| {
            vec![
                idx(i),
                output.t[i].to_string(),
                output.truth_w[i].to_string(),
                output.obs_s[i].to_string(),
                output.post_mean[i].to_string(),
                output.post_lo2sd[i].to_string(),
                output.post_hi2sd[i].to_string(),
            ]
        }),
    )?;
    let mut snapshot_header = vec!["iteration".to_string()];
    snapshot_header.extend((0..n).map(|i| format!("w{i}")));
    write_csv(
        &dir.join("snapshots.csv"),
        &snapshot_header,
        output.snapshots.iter().map(|(it, w)| {
            let mut row = vec![it.to_string()];
            row.extend(w.iter().map(|v| v.to_string()));
            row
        }),
    )?;
    Ok(())
}

pub fn cmd_demo(config: &DemoConfig) -> Result<DemoOutput, CliError> {
    let output = run_inference(config)?;
    write_outputs(&output, &config.out_dir)?;
    Ok(output)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> DemoConfig {
        DemoConfig {
            n: 6,
            ..DemoConfig::default()
        }
    }

    #[test]
    fn rejects_out_of_contract_configs() {
        let mut c = tiny_config();
        c.iters = 999;
        assert_eq!(run_inference(&c).unwrap_err().exit_code(), 1);
        let mut c = tiny_config();
        c.n = 1;
        assert_eq!(run_inference(&c).unwrap_err().exit_code(), 1);
        let mut c = tiny_config();
        c.noise_sd = 0.0;
        assert_eq!(run_inference(&c).unwrap_err().exit_code(), 1);
        let mut c = tiny_config();
        c.period = -1.0;
        assert_eq!(run_inference(&c).unwrap_err().exit_code(), 1);
        let mut c = tiny_config();
        c.sigma = 0.0;
        assert_eq!(run_inference(&c).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn log_likelihood_matches_hand_formula() {
        let grid = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        let kernel = SeKernelParams::new(1.0, 1.0).unwrap();
        let model = WarpedSignalModel::new(2.0, 0.5, 0.1, grid, kernel).unwrap();
        let w = [0.25, -0.5];
        let fit = [2.0 * (0.25f64 / 0.5).sin(), 2.0 * (0.5f64 / 0.5).sin()];
        let s = [fit[0] + 0.05, fit[1] - 0.02];
        let expect = -0.5 * (2.0 * (TAU * 0.01).ln() + (0.05f64 * 0.05 + 0.02 * 0.02) / 0.01);
        let got = model.log_likelihood(&s, &w);
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn snapshots_cover_the_contract_iterations() {
        let out = run_inference(&tiny_config()).unwrap();
        let labels: Vec<usize> = out.snapshots.iter().map(|(it, _)| *it).collect();
        assert_eq!(labels, SNAPSHOT_ITERATIONS);
        for (_, w) in &out.snapshots {
            assert_eq!(w.len(), 6);
        }
    }

    #[test]
    fn envelope_brackets_the_mean_pointwise() {
        let out = run_inference(&tiny_config()).unwrap();
        for i in 0..out.post_mean.len() {
            assert!(out.post_lo2sd[i] <= out.post_mean[i]);
            assert!(out.post_mean[i] <= out.post_hi2sd[i]);
        }
    }

    #[test]
    fn inference_is_deterministic_in_the_seed() {
        let a = run_inference(&tiny_config()).unwrap();
        let b = run_inference(&tiny_config()).unwrap();
        assert_eq!(a.post_mean, b.post_mean);
        assert_eq!(a.truth_w, b.truth_w);
        let mut other = tiny_config();
        other.seed = 43;
        let c = run_inference(&other).unwrap();
        assert_ne!(a.truth_w, c.truth_w);
    }
}
