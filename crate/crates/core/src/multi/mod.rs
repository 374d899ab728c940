//! Multivariate estimators.
//!
//! All estimators run on explicit finite distributions. Lattice phase
//! estimation is simulated exactly once per call and its outcome table is
//! sampled for the median repetitions, which is equivalent to rerunning the
//! circuit since every repetition prepares the same state.

mod classical;
mod full;
mod meticulous;
mod simple;
mod tail;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{CostLedger, CostReport};

pub use classical::{geometric_median, ClassicalMultiPlan, QuantilePlan};
pub use full::{
    classical_multi, full_estimator, notso_eps0, notso_kickstart_trials, notso_multi, quantile_estimate,
    FullCertificates, FullPlan,
};
pub use meticulous::{
    build_v_channel, constrained_meticulous, v_channel_params, MeticulousPlan, VCertificateSummary, VChannel, VParams,
    XI,
};
pub use simple::{constrained_simple, refine_multi, simple_s0, simple_scale, RefineMultiPlan, SimplePlan};
pub use tail::{variance_tail_check, TailCheckResult, TailViolation, TAIL_ENUMERATION_CAP};

/// Inner constrained estimator used after the classical kickstart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inner {
    /// Grover lattice estimator with `d^{1/4}` overhead.
    Simple,
    /// Lattice estimator driven by univariate phase channels.
    Meticulous,
}

impl fmt::Display for Inner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inner::Simple => "simple",
            Inner::Meticulous => "meticulous",
        })
    }
}

impl FromStr for Inner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Inner::Simple),
            "meticulous" => Ok(Inner::Meticulous),
            other => Err(Error::pre(format!("unknown inner estimator `{other}`, expected simple or meticulous"))),
        }
    }
}

/// How the meticulous estimator models its per-point phase channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VMode {
    /// Runs the univariate estimator to build each channel's outcome law.
    Empirical,
    /// Exact phase with an orthogonal error branch of norm `ξ`.
    #[default]
    IdealPhase,
}

impl fmt::Display for VMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VMode::Empirical => "empirical",
            VMode::IdealPhase => "ideal-phase",
        })
    }
}

impl FromStr for VMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empirical" => Ok(VMode::Empirical),
            "ideal-phase" | "ideal" => Ok(VMode::IdealPhase),
            other => Err(Error::pre(format!("unknown channel mode `{other}`, expected empirical or ideal-phase"))),
        }
    }
}

/// Multivariate estimate with its cost ledger and any certificates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiEstimateReport {
    /// Estimated mean vector.
    pub estimate: Vec<f64>,
    /// Experiment accesses.
    pub oracle_calls: u64,
    /// Phase-estimation runs.
    pub pe_invocations: u64,
    /// Peak registers.
    pub registers_peak: u64,
    /// Seed of the run.
    pub seed: u64,
    /// Per-stage breakdown.
    pub cost: CostReport,
    /// Channel certificate of the meticulous stage, when one ran.
    pub v_certificate: Option<VCertificateSummary>,
    /// Stage certificates of the full pipeline.
    pub certificates: Option<FullCertificates>,
    /// Informational flags (assumptions not met, degenerate stages).
    pub flags: Vec<String>,
}

impl MultiEstimateReport {
    pub(crate) fn new(estimate: Vec<f64>, seed: u64, ledger: &CostLedger) -> Self {
        let cost = ledger.report();
        Self {
            estimate,
            oracle_calls: cost.experiment_accesses,
            pe_invocations: cost.pe_invocations,
            registers_peak: cost.registers_peak,
            seed,
            cost,
            v_certificate: None,
            certificates: None,
            flags: Vec::new(),
        }
    }
}

pub(crate) fn le(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * b.abs().max(1.0)
}

/// Prefixes an error message with the stage that raised it.
pub(crate) fn labeled<T>(stage: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Precondition(m) => Error::Precondition(format!("[{stage}] {m}")),
        Error::Certificate(m) => Error::Certificate(format!("[{stage}] {m}")),
        Error::Cap { what, needed, cap } => Error::Cap { what: format!("[{stage}] {what}"), needed, cap },
        other => other,
    })
}

/// Coordinate-wise median of sample vectors.
pub(crate) fn coordinate_median(samples: &[Vec<f64>], d: usize) -> Vec<f64> {
    (0..d)
        .map(|a| {
            let mut col: Vec<f64> = samples.iter().map(|s| s[a]).collect();
            crate::uni::median(&mut col)
        })
        .collect()
}
