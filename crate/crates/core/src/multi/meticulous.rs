use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ledger::{CostLedger, EstimatorConfig};
use crate::phase::channel_phase_estimate;
use crate::prob::{FiniteDist, UniRv};
use crate::rng::{self, Rng};
use crate::sim::{check_cap, LatticeSpec};
use crate::uni::{check_unit_interval, constrained_core, median_boost_count, pow2_ceil, ConstrainedPlan};

use super::{coordinate_median, labeled, le, MultiEstimateReport, VMode};

/// Target error `ξ` of each phase channel.
pub const XI: f64 = 1.0 / 13.0;

/// Parameter map from a target phase unitary `e^{iN·E X}` to the univariate
/// estimator run that approximates it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VParams {
    /// Phase multiplier `N`.
    pub resolution: u64,
    /// Standard-deviation bound of the channel variable.
    pub sigma0: f64,
    /// Mean bound of the channel variable.
    pub eps0: f64,
    /// Target error `ξ`.
    pub xi: f64,
    /// Accuracy of the univariate run, `⌈3Nσ0/(2ξ)⌉`.
    pub n_v: u64,
    /// Confidence of the univariate run, `ξ²/9`.
    pub delta_v: f64,
    /// `4δ_v + (Nσ0/n_v)²`, which is below `ξ²`.
    pub proof_bound: f64,
}

/// Parameters for approximating `e^{iN·E X}` to error `ξ`.
pub fn v_channel_params(resolution: u64, sigma0: f64, eps0: f64, xi: f64) -> Result<VParams> {
    check_unit_interval(xi, "ξ")?;
    if resolution == 0 || !(sigma0 > 0.0) {
        return Err(Error::pre(format!("channel needs N ≥ 1 and σ0 > 0, got N = {resolution}, σ0 = {sigma0}")));
    }
    let n_v = (3.0 * resolution as f64 * sigma0 / (2.0 * xi)).ceil() as u64;
    let delta_v = xi * xi / 9.0;
    let r = resolution as f64 * sigma0 / n_v as f64;
    Ok(VParams { resolution, sigma0, eps0, xi, n_v, delta_v, proof_bound: 4.0 * delta_v + r * r })
}

impl VParams {
    fn plan(&self) -> Result<ConstrainedPlan> {
        ConstrainedPlan::new(self.n_v as f64, self.sigma0, self.eps0, self.delta_v)
    }
}

/// Modeled phase channel for one lattice point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VChannel {
    /// Channel model.
    pub mode: VMode,
    /// Parameters.
    pub params: VParams,
    /// Exact `E X` of the channel variable.
    pub mu: f64,
    /// Outcome law `(q_j, y_j)` of the univariate runs; empty in ideal-phase mode.
    pub outcomes: Vec<(f64, f64)>,
    /// Coherent amplitude `c = Σ q_j e^{iNy_j}` along the ideal branch.
    pub coherent: Complex64,
    /// `Σ q_j |e^{iNy_j} − e^{iNμ}|²`, or `ξ²` in ideal-phase mode.
    pub deviation_sq: f64,
}

impl VChannel {
    /// `deviation² ≤ ξ²`.
    pub fn certified(&self) -> bool {
        self.deviation_sq <= self.params.xi * self.params.xi * (1.0 + 1e-12)
    }

    /// `deviation² ≤ 4δ_v + (Nσ0/n_v)²`.
    pub fn within_proof_bound(&self) -> bool {
        self.deviation_sq <= self.params.proof_bound * (1.0 + 1e-12)
    }
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

fn v_channel_unchecked(
    rv: &UniRv<f64>,
    p: &VParams,
    mode: VMode,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<VChannel> {
    let mu = rv.moments().mean;
    let nf = p.resolution as f64;
    let ideal = cis(nf * mu);
    match mode {
        VMode::IdealPhase => {
            let c = ideal * (1.0 - p.xi * p.xi / 2.0);
            let deviation_sq = (c - ideal).norm_sqr() + (1.0 - c.norm_sqr());
            Ok(VChannel { mode, params: *p, mu, outcomes: Vec::new(), coherent: c, deviation_sq })
        }
        VMode::Empirical => {
            let plan = p.plan()?;
            let scratch = CostLedger::new();
            let q = 1.0 / cfg.t_emp as f64;
            let mut outcomes = Vec::with_capacity(cfg.t_emp);
            for j in 0..cfg.t_emp {
                let mut r = rng::rng(rng::derive(seed, j as u64));
                outcomes.push((q, constrained_core(rv, &plan, &mut r, &scratch, "v", cfg)?));
            }
            let coherent = outcomes.iter().map(|&(q, y)| cis(nf * y) * q).sum();
            let deviation_sq = outcomes.iter().map(|&(q, y)| q * (cis(nf * y) - ideal).norm_sqr()).sum();
            Ok(VChannel { mode, params: *p, mu, outcomes, coherent, deviation_sq })
        }
    }
}

/// Builds the phase channel for `rv`, which must satisfy the constrained
/// univariate preconditions `Var X ≤ σ0²` and `|E X| ≤ ε0 ≤ σ0/3`.
#[allow(clippy::too_many_arguments)]
pub fn build_v_channel(
    rv: &UniRv<f64>,
    resolution: u64,
    sigma0: f64,
    eps0: f64,
    xi: f64,
    mode: VMode,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<VChannel> {
    cfg.validate()?;
    let p = v_channel_params(resolution, sigma0, eps0, xi)?;
    if !le(eps0, sigma0 / 3.0) {
        return Err(Error::pre(format!("channel needs ε0 ≤ σ0/3, got ε0 = {eps0}, σ0 = {sigma0}")));
    }
    let m = rv.moments();
    if !le(m.variance, sigma0 * sigma0) || !le(m.mean.abs(), eps0) {
        return Err(Error::pre(format!(
            "channel variable needs Var ≤ {} and |E| ≤ {eps0}, measured {} and {}",
            sigma0 * sigma0,
            m.variance,
            m.mean.abs()
        )));
    }
    v_channel_unchecked(rv, &p, mode, seed, cfg)
}

/// Parameters of the constrained meticulous estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeticulousPlan {
    /// Dimension.
    pub d: usize,
    /// Accuracy parameter `n`.
    pub n: f64,
    /// Trace bound `σ0`.
    pub sigma0: f64,
    /// Confidence `δ`.
    pub delta: f64,
    /// Rescaling `K = √(10D)·σ0`.
    pub scale: f64,
    /// Lattice resolution and phase multiplier `N = 2^⌈log₂(8πn√(10D))⌉`.
    pub resolution: u64,
    /// Median repetitions at confidence `δ/d`.
    pub trials: usize,
    /// Channel parameters with `σ0 = 1`, `ε0 = 1/3`, `ξ = 1/13`.
    pub v: VParams,
    /// Univariate accuracy `n_v` of each channel.
    pub v_trials: u64,
    /// Univariate confidence `δ_v` of each channel.
    pub v_delta: f64,
    /// Registers held by one channel application: the summed median counts of
    /// its round schedule.
    pub v_registers: u64,
    /// Experiment accesses per channel application (two univariate runs).
    pub v_cost: u64,
    /// Whether `n ≥ ln(d/δ)/√(ln d)` holds; undefined at `d = 1`.
    pub assumption_holds: bool,
}

impl MeticulousPlan {
    /// Plan for `(d, n, σ0, δ)`.
    pub fn new(d: usize, n: f64, sigma0: f64, delta: f64, cfg: &EstimatorConfig) -> Result<Self> {
        if d == 0 {
            return Err(Error::pre("dimension must be at least 1"));
        }
        check_unit_interval(delta, "δ")?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::pre(format!("n = {n} must be positive")));
        }
        let root = (10.0 * cfg.d_const).sqrt();
        let resolution = pow2_ceil(8.0 * std::f64::consts::PI * n * root)?;
        let v = v_channel_params(resolution, 1.0, 1.0 / 3.0, XI)?;
        let vplan = v.plan()?;
        let v_registers = vplan.rounds.iter().map(|r| r.trials as u64).sum();
        let steps: u64 = vplan.rounds.iter().map(|r| r.trials as u64 * r.resolution).sum();
        let df = d as f64;
        let assumption_holds = d >= 2 && n >= (df / delta).ln() / df.ln().sqrt();
        Ok(Self {
            d,
            n,
            sigma0,
            delta,
            scale: root * sigma0,
            resolution,
            trials: median_boost_count(delta / df)?,
            v,
            v_trials: v.n_v,
            v_delta: v.delta_v,
            v_registers,
            v_cost: 2 * steps * cfg.grover_cost,
            assumption_holds,
        })
    }

    /// Lattice points `N^d`.
    pub fn points(&self) -> u128 {
        (self.resolution as u128).saturating_pow(self.d as u32)
    }
}

/// Per-point channel certificate summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VCertificateSummary {
    /// Channel model.
    pub mode: VMode,
    /// `ξ`.
    pub xi: f64,
    /// Bound checked per point: the proof bound in empirical mode, `ξ²` in
    /// ideal-phase mode.
    pub threshold: f64,
    /// `4δ_v + (Nσ0/n_v)²`.
    pub proof_bound: f64,
    /// Lattice points checked.
    pub points: usize,
    /// Largest deviation² over points.
    pub max_deviation_sq: f64,
    /// Points over the threshold.
    pub violations: usize,
    /// First offending flat lattice index.
    pub first_violation: Option<usize>,
}

impl VCertificateSummary {
    /// No point exceeds the threshold.
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Lattice phase estimation where each point applies its modeled channel for
/// `⟨u, X⟩/K`; samples read as `2πK·fraction` per coordinate.
pub(crate) fn meticulous_core(
    dist: &FiniteDist<f64>,
    plan: &MeticulousPlan,
    mode: VMode,
    rng: &mut Rng,
    ledger: &CostLedger,
    stage: &str,
    cfg: &EstimatorConfig,
) -> Result<(Vec<f64>, Option<VCertificateSummary>)> {
    if plan.sigma0 == 0.0 {
        ledger.charge(stage, 0)?;
        return Ok((vec![0.0; dist.dim()], None));
    }
    check_cap("meticulous lattice", plan.points())?;
    let lat = LatticeSpec::new(plan.d, plan.resolution as usize)?;
    let k = plan.scale;
    let channel_seed = rng::fork(rng);
    let points = plan.points() as usize;
    let channels: Vec<(Complex64, f64)> = (0..points)
        .into_par_iter()
        .map(|idx| {
            let u = lat.point::<f64>(idx);
            let rv = dist.project_unchecked(&u).map(|v| v / k);
            let ch = v_channel_unchecked(&rv, &plan.v, mode, rng::derive(channel_seed, idx as u64), cfg)?;
            Ok((ch.coherent, ch.deviation_sq))
        })
        .collect::<Result<_>>()?;

    let threshold = match mode {
        VMode::Empirical => plan.v.proof_bound,
        VMode::IdealPhase => plan.v.xi * plan.v.xi,
    };
    let over: Vec<usize> = (0..points).filter(|&i| channels[i].1 > threshold * (1.0 + 1e-12)).collect();
    let cert = VCertificateSummary {
        mode,
        xi: plan.v.xi,
        threshold,
        proof_bound: plan.v.proof_bound,
        points,
        max_deviation_sq: channels.iter().fold(0.0, |m, c| m.max(c.1)),
        violations: over.len(),
        first_violation: over.first().copied(),
    };

    let coherent: Vec<Complex64> = channels.into_iter().map(|c| c.0).collect();
    let table = channel_phase_estimate(lat, &coherent)?;
    let samples: Vec<Vec<f64>> = table
        .sample_with(rng, plan.trials)
        .into_iter()
        .map(|flat| table.fractions(flat).into_iter().map(|f| std::f64::consts::TAU * k * f).collect())
        .collect();
    ledger.charge(stage, (plan.trials as u64 * plan.v_cost) as i64)?;
    ledger.record_pe(stage, plan.trials as u64);
    ledger.record_registers(stage, plan.v_registers);
    Ok((coordinate_median(&samples, plan.d), Some(cert)))
}

/// Constrained meticulous estimator. Requires `tr Σ ≤ σ0²` and
/// `‖E X‖₂ ≤ (2/15)·√(10D)·σ0`; then `‖μ̂ − E X‖_∞ ≤ σ0/n` with probability at
/// least `1 − δ`. The assumption `n ≥ ln(d/δ)/√(ln d)` is reported as a flag.
pub fn constrained_meticulous(
    dist: &FiniteDist<f64>,
    n: f64,
    sigma0: f64,
    delta: f64,
    mode: VMode,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<MultiEstimateReport> {
    cfg.validate()?;
    if !(sigma0 >= 0.0) {
        return Err(Error::pre(format!("σ0 = {sigma0} must be nonnegative")));
    }
    let plan = MeticulousPlan::new(dist.dim(), n, sigma0, delta, cfg)?;
    let tr = dist.covariance().trace();
    if !le(tr, sigma0 * sigma0) {
        return Err(Error::pre(format!("meticulous estimator needs tr Σ ≤ σ0² = {}, measured {tr}", sigma0 * sigma0)));
    }
    let cap = 2.0 / 15.0 * (10.0 * cfg.d_const).sqrt() * sigma0;
    let mean_norm = dist.mean().iter().map(|v| v * v).sum::<f64>().sqrt();
    if !le(mean_norm, cap) {
        return Err(Error::pre(format!(
            "meticulous estimator needs ‖E X‖₂ ≤ (2/15)√(10D)σ0 = {cap}, measured {mean_norm}"
        )));
    }
    if sigma0 > 0.0 {
        check_cap("meticulous lattice", plan.points())?;
    }
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let (est, cert) = labeled("meticulous", meticulous_core(dist, &plan, mode, &mut r, &ledger, "meticulous", cfg))?;
    let mut report = MultiEstimateReport::new(est, seed, &ledger);
    report.v_certificate = cert;
    if !plan.assumption_holds {
        report.flags.push("n below ln(d/δ)/√(ln d)".into());
    }
    Ok(report)
}
