use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use gpfast_cli::bench::{cmd_bench, BenchConfig};
use gpfast_cli::demo::{cmd_demo, DemoConfig};
use gpfast_cli::CliError;

/// Fast Gaussian-process primitives: benchmarks and a worked demo.
#[derive(Parser)]
#[command(name = "gpfast", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Race each fast path against its naive baseline, writing a CSV report
    Bench {
        /// Comma-separated matrix sizes, each >= 2
        #[arg(long, value_delimiter = ',', default_value = "200")]
        sizes: Vec<usize>,
        /// Timed repetitions per measurement (>= 3, after one warm-up)
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// RNG seed for benchmark inputs
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Build kernel matrices without the stabilizing diagonal nugget
        #[arg(long)]
        no_jitter: bool,
        /// Output CSV path
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
    },
    /// Recover a latent warping from a noisy sinusoid, writing CSV outputs
    Demo {
        /// Number of grid points (>= 2)
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// MCMC iterations (>= 1000 so every snapshot iteration exists)
        #[arg(long, default_value_t = 1_000)]
        iters: usize,
        /// RNG seed for synthesis; the sampler derives its own stream
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Signal amplitude A in A*sin((t+w)/T)
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// Signal period T (> 0)
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        /// Observation noise standard deviation (> 0)
        #[arg(long = "noise-sd", default_value_t = 0.001)]
        noise_sd: f64,
        /// Kernel amplitude sigma (> 0)
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Kernel length scale phi (> 0)
        #[arg(long, default_value_t = 1.0)]
        phi: f64,
        /// Directory for the four output CSV files
        #[arg(long = "out-dir", default_value = "demo-out")]
        out_dir: PathBuf,
    },
}

/// GPFAST_SEED overrides --seed when set, so CI can pin every command.
fn effective_seed(flag_seed: u64) -> Result<u64, CliError> {
    match std::env::var("GPFAST_SEED") {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "GPFAST_SEED must be an unsigned integer, got {raw:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(flag_seed),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(CliError::Usage("GPFAST_SEED is not valid UTF-8".into()))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bench {
            sizes,
            reps,
            seed,
            no_jitter,
            out,
        } => {
            let config = BenchConfig {
                sizes,
                reps,
                seed: effective_seed(seed)?,
                jitter: !no_jitter,
                out,
            };
            let report = cmd_bench(&config)?;
            println!(
                "wrote {} benchmark rows to {}",
                report.rows.len(),
                config.out.display()
            );
            Ok(())
        }
        Command::Demo {
            n,
            iters,
            seed,
            amplitude,
            period,
            noise_sd,
            sigma,
            phi,
            out_dir,
        } => {
            let config = DemoConfig {
                n,
                iters,
                seed: effective_seed(seed)?,
                amplitude,
                period,
                noise_sd,
                sigma,
                phi,
                out_dir,
            };
            cmd_demo(&config)?;
            println!(
                "wrote truth, observations, posterior summary, and snapshots to {}",
                config.out_dir.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; anything else is a
            // usage error, exit code 1.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
