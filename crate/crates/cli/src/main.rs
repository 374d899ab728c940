//! `qmean` command-line driver.

mod bench;
mod config;
mod run;
mod validate;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmean::{Error, Result};

use config::Settings;

#[derive(Debug, Parser)]
#[command(name = "qmean", version, about = "Exact simulation of Grover-operator quantum mean estimators")]
struct Cli {
    /// JSON configuration file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to QMEAN_THREADS, then the number of CPUs).
    #[arg(long, global = true, env = "QMEAN_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigen-decomposition of the Grover operator of one coordinate.
    Spectrum(SpectrumArgs),
    /// Exact single-register phase estimation of the Grover operator.
    Pe1d(Pe1dArgs),
    /// Exact lattice phase estimation of the plane wave at the mean vector.
    Pemd(PemdArgs),
    /// Run an estimator.
    #[command(subcommand)]
    Estimate(EstimateCommand),
    /// Run the invariant suite and emit a pass/fail JSON verdict.
    Validate(ValidateArgs),
    /// Monte Carlo sweep emitting CSV.
    Bench(BenchArgs),
}

/// Parameters shared by several commands.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Distribution JSON file, or `bundled:<name>`.
    #[arg(long)]
    pub dist: Option<String>,
    /// Accuracy parameter `n`.
    #[arg(long)]
    pub n: Option<f64>,
    /// Failure probability `δ`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Refinement accuracy `ε`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Initial mean bound `ε0`.
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Standard-deviation (or trace) bound `σ0`.
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Tail-lemma constant `D`.
    #[arg(long = "D")]
    pub d_const: Option<f64>,
    /// Quantile sandwich constant `C`.
    #[arg(long = "C")]
    pub c_const: Option<f64>,
    /// RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    /// Coordinate of the distribution to use.
    #[arg(long, default_value_t = 0)]
    coord: usize,
    /// Second-moment scale for the key-property certificate (with --eps).
    #[arg(long)]
    s0: Option<f64>,
}

#[derive(Debug, Args)]
struct Pe1dArgs {
    #[command(flatten)]
    common: Common,
    /// Coordinate of the distribution to use.
    #[arg(long, default_value_t = 0)]
    coord: usize,
    /// Register size (a power of two).
    #[arg(long = "N")]
    resolution: usize,
    /// Window half-width in grid steps.
    #[arg(long, default_value_t = 2)]
    kappa: u32,
    /// Second-moment scale of the angle map (with --eps).
    #[arg(long)]
    s0: Option<f64>,
}

#[derive(Debug, Args)]
struct PemdArgs {
    #[command(flatten)]
    common: Common,
    /// Lattice resolution (a power of two).
    #[arg(long = "N")]
    resolution: usize,
    /// Window half-width in grid steps.
    #[arg(long, default_value_t = 2)]
    kappa: u32,
    /// Injected state error.
    #[arg(long)]
    noise: Option<f64>,
    /// Noise model: orthogonal-junk or phase-jitter.
    #[arg(long, default_value = "orthogonal-junk")]
    mode: String,
}

#[derive(Debug, Subcommand)]
enum EstimateCommand {
    /// Univariate estimators on one coordinate.
    Uni(EstimateArgs),
    /// Multivariate estimators.
    Multi(EstimateArgs),
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: Common,
    /// Algorithm identifier (see README).
    #[arg(long)]
    algorithm: Option<String>,
    /// Coordinate for univariate runs.
    #[arg(long, default_value_t = 0)]
    coord: usize,
    /// Quantile level for `quantile`.
    #[arg(long)]
    p: Option<f64>,
    /// Inner multivariate estimator: simple or meticulous.
    #[arg(long)]
    inner: Option<String>,
    /// Channel model of the meticulous estimator: empirical or ideal-phase.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Parameter sweep, e.g. `n=2,4,8` or `delta=0.1,0.2`.
    #[arg(long)]
    sweep: Option<String>,
    /// Trials per sweep point.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Algorithm identifier.
    #[arg(long, default_value = "full")]
    algorithm: String,
    /// Inner multivariate estimator.
    #[arg(long)]
    inner: Option<String>,
    /// Channel model of the meticulous estimator.
    #[arg(long)]
    mode: Option<String>,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn json(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => config::FileConfig::load(path)?,
        None => config::FileConfig::default(),
    };
    let text = match &cli.command {
        Command::Spectrum(a) => {
            let s = Settings::merge(&file, &a.common)?;
            json(&run::spectrum(&s, a.coord, a.s0)?)?
        }
        Command::Pe1d(a) => {
            let s = Settings::merge(&file, &a.common)?;
            json(&run::pe1d(&s, a.coord, a.resolution, a.kappa, a.s0)?)?
        }
        Command::Pemd(a) => {
            let s = Settings::merge(&file, &a.common)?;
            json(&run::pemd(&s, a.resolution, a.kappa, a.noise, &a.mode)?)?
        }
        Command::Estimate(EstimateCommand::Uni(a)) => {
            let s = Settings::merge_estimate(&file, &a.common, a.inner.as_deref(), a.mode.as_deref(), a.p)?;
            json(&run::estimate_uni(&s, a.algorithm.as_deref().unwrap_or("notso-uni"), a.coord)?)?
        }
        Command::Estimate(EstimateCommand::Multi(a)) => {
            let s = Settings::merge_estimate(&file, &a.common, a.inner.as_deref(), a.mode.as_deref(), a.p)?;
            json(&run::estimate_multi(&s, a.algorithm.as_deref().unwrap_or("full"))?)?
        }
        Command::Validate(a) => {
            let s = Settings::merge(&file, &a.common)?;
            let verdict = validate::run(&s)?;
            let text = json(&verdict)?;
            if !verdict.passed {
                emit(&cli.out, &text)?;
                return Err(Error::Certificate(format!("{} invariant check(s) failed", verdict.failures())));
            }
            text
        }
        Command::Bench(a) => {
            let s = Settings::merge_estimate(&file, &a.common, a.inner.as_deref(), a.mode.as_deref(), None)?;
            bench::run(&s, &a.algorithm, a.sweep.as_deref(), a.trials)?
        }
    };
    emit(&cli.out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error ({}): {e}", e.category());
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
