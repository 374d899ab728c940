use serde::Serialize;

use crate::error::{Error, Result};
use crate::ledger::{stage_path, CostLedger, EstimatorConfig};
use crate::phase::PhaseSampler;
use crate::prob::UniRv;
use crate::rng::{self, Rng};
use crate::spectrum::{key_lambda, root_solutions};

use super::boost::{ceil_log2_rounds, check_unit_interval, loglog_deltas, median, median_boost_count, pow2_ceil};
use super::classical::{median_of_means, MomPlan};

/// Second-moment scale `s0 = √10/12` of the univariate refinement step.
pub fn refine_s0() -> f64 {
    10f64.sqrt() / 12.0
}

/// Phase register size `N = 2^⌈log₂(24π/ε)⌉` of the refinement step.
pub fn refine_resolution(eps: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(Error::pre(format!("refinement accuracy ε = {eps} must be positive")));
    }
    pow2_ceil(24.0 * std::f64::consts::PI / eps)
}

/// Parameters of one refinement step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinePlan {
    /// Accuracy `ε`.
    pub eps: f64,
    /// Confidence `δ`.
    pub delta: f64,
    /// Phase register size `N`.
    pub resolution: u64,
    /// Median repetitions `M`.
    pub trials: usize,
    /// Truncation scale `λ = 5/(4 − 5 s0²)`.
    pub lambda: f64,
}

impl RefinePlan {
    /// Plan for `(ε, δ)`.
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        Ok(Self {
            eps,
            delta,
            resolution: refine_resolution(eps)?,
            trials: median_boost_count(delta)?,
            lambda: key_lambda(refine_s0()),
        })
    }
}

/// One refinement step on `rv`: `M` phase estimations of the Grover operator
/// on `θ = 2 arctan(½·clamp(X, ±1/(λε)))`, each read as `2π·fraction`, then
/// the median.
pub(crate) fn refine_core(
    rv: &UniRv<f64>,
    plan: &RefinePlan,
    rng: &mut Rng,
    ledger: &CostLedger,
    stage: &str,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    let theta = rv.to_angle(plan.lambda, plan.eps)?;
    let components: Vec<(f64, f64)> = root_solutions(&theta)?.iter().map(|s| (s.alpha, s.overlap)).collect();
    let sampler = PhaseSampler::new(&components, plan.resolution as usize);
    let per_pe = plan.resolution * cfg.grover_cost;
    let mut mu = Vec::with_capacity(plan.trials);
    for _ in 0..plan.trials {
        ledger.charge(stage, per_pe as i64)?;
        ledger.record_pe(stage, 1);
        mu.push(std::f64::consts::TAU * sampler.draw(rng));
    }
    ledger.record_registers(stage, 1);
    Ok(median(&mut mu))
}

/// Number of rounds `max(0, ⌈log₂(n ε0/σ0)⌉)` of the constrained estimator.
pub fn constrained_rounds(n: f64, sigma0: f64, eps0: f64) -> usize {
    if !(sigma0 > 0.0) || !(eps0 > 0.0) {
        return 0;
    }
    ceil_log2_rounds(n * eps0 / sigma0)
}

/// Parameters of a constrained univariate run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstrainedPlan {
    /// Accuracy parameter `n`.
    pub n: f64,
    /// Standard-deviation bound `σ0`.
    pub sigma0: f64,
    /// Initial mean bound `ε0`.
    pub eps0: f64,
    /// Confidence `δ`.
    pub delta: f64,
    /// Round plans with `ε'_ℓ = ε0/(2^{ℓ−1}·4σ0)` and log-log `δ'_ℓ`.
    pub rounds: Vec<RefinePlan>,
}

impl ConstrainedPlan {
    /// Plan for `(n, σ0, ε0, δ)`.
    pub fn new(n: f64, sigma0: f64, eps0: f64, delta: f64) -> Result<Self> {
        check_unit_interval(delta, "δ")?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::pre(format!("n = {n} must be positive")));
        }
        if !(sigma0 >= 0.0 && eps0 >= 0.0) {
            return Err(Error::pre(format!("σ0 = {sigma0} and ε0 = {eps0} must be nonnegative")));
        }
        let t = constrained_rounds(n, sigma0, eps0);
        let rounds = loglog_deltas(t, delta)
            .iter()
            .enumerate()
            .map(|(l, &dl)| RefinePlan::new(eps0 / (2f64.powi(l as i32) * 4.0 * sigma0), dl))
            .collect::<Result<_>>()?;
        Ok(Self { n, sigma0, eps0, delta, rounds })
    }
}

/// Rounds of refinement on `(X − μ̃)/(4σ0)`, accumulating `μ̃ += 4σ0·μ_ℓ`.
pub(crate) fn constrained_core(
    rv: &UniRv<f64>,
    plan: &ConstrainedPlan,
    rng: &mut Rng,
    ledger: &CostLedger,
    stage: &str,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    ledger.charge(stage, 0)?;
    let scale = 4.0 * plan.sigma0;
    let mut mu = 0.0;
    for round in &plan.rounds {
        let shifted = rv.map(|x| (x - mu) / scale);
        mu += scale * refine_core(&shifted, round, rng, ledger, stage, cfg)?;
    }
    Ok(mu)
}

/// Classical kickstart at `(9, δ/2)` then the constrained estimator on the
/// recentred variable with `ε0 = σ0/3` at `δ/2`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn notso_core(
    rv: &UniRv<f64>,
    sigma0: f64,
    n: f64,
    delta: f64,
    rng: &mut Rng,
    ledger: &CostLedger,
    prefix: &str,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    let mom = MomPlan::new(9.0, delta / 2.0)?;
    let sampler = rv.sampler();
    let values = rv.values();
    let mu1 = median_of_means(|r| values[sampler.draw(r)], mom, rng, ledger, &stage_path(prefix, "classical"))?;
    let plan = ConstrainedPlan::new(n, sigma0, sigma0 / 3.0, delta / 2.0)?;
    let centred = rv.map(|x| x - mu1);
    let mu2 = constrained_core(&centred, &plan, rng, ledger, &stage_path(prefix, "constrained"), cfg)?;
    Ok(mu1 + mu2)
}

/// Two-stage relative-error estimate for a variable with values in `[0, 1]`.
///
/// Stage 1 estimates `m̂` to within `1/(2n²)` using `σ0 = 1`. Since
/// `Var X ≤ E X` on `[0, 1]`, stage 2 uses `σ0² = min(1, m̂ + 1/(2n²)) ≥ Var X`
/// and lands within `σ0/n ≤ √(E X)/n + 1/n²`.
pub(crate) fn bounded_rel_core(
    rv: &UniRv<f64>,
    n: f64,
    delta: f64,
    rng: &mut Rng,
    ledger: &CostLedger,
    prefix: &str,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    let slack = 1.0 / (2.0 * n * n);
    let m1 = notso_core(rv, 1.0, 2.0 * n * n, delta / 2.0, rng, ledger, &stage_path(prefix, "stage1"), cfg)?;
    let sigma0 = (m1.max(0.0) + slack).min(1.0).sqrt();
    let m2 = notso_core(rv, sigma0, n, delta / 2.0, rng, ledger, &stage_path(prefix, "stage2"), cfg)?;
    Ok(m2.clamp(0.0, 1.0))
}

/// Estimator output with its cost ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    /// Point estimate.
    pub estimate: f64,
    /// Experiment accesses.
    pub oracle_calls: u64,
    /// Phase-estimation runs.
    pub pe_invocations: u64,
    /// Peak registers.
    pub registers_peak: u64,
    /// Seed of the run.
    pub seed: u64,
    /// Per-stage breakdown.
    pub cost: crate::ledger::CostReport,
}

impl EstimateReport {
    pub(crate) fn new(estimate: f64, seed: u64, ledger: &CostLedger) -> Self {
        let cost = ledger.report();
        Self {
            estimate,
            oracle_calls: cost.experiment_accesses,
            pe_invocations: cost.pe_invocations,
            registers_peak: cost.registers_peak,
            seed,
            cost,
        }
    }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * b.abs().max(1.0)
}

/// Refinement step on `rv`. Requires `ε ≤ 1/12`, `|E X| ≤ ε`, `Var X ≤ 1/16`;
/// then `P[|μ̂ − E X| ≤ ε/2] ≥ 1 − δ`.
pub fn refine_uni(rv: &UniRv<f64>, eps: f64, delta: f64, seed: u64, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let plan = RefinePlan::new(eps, delta)?;
    if !le(eps, 1.0 / 12.0) {
        return Err(Error::pre(format!("refinement needs ε ≤ 1/12, got {eps}")));
    }
    let m = rv.moments();
    if !le(m.mean.abs(), eps) {
        return Err(Error::pre(format!("refinement needs |E X| ≤ ε = {eps}, measured |E X| = {}", m.mean.abs())));
    }
    if !le(m.variance, 1.0 / 16.0) {
        return Err(Error::pre(format!("refinement needs Var X ≤ 1/16, measured {}", m.variance)));
    }
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let est = refine_core(rv, &plan, &mut r, &ledger, "refine", cfg)?;
    Ok(EstimateReport::new(est, seed, &ledger))
}

/// Constrained univariate estimator. Requires `Var X ≤ σ0²` and
/// `|E X| ≤ ε0 ≤ σ0/3`; then `P[|μ̂ − E X| ≤ σ0/n] ≥ 1 − δ`.
pub fn constrained_uni(
    rv: &UniRv<f64>,
    sigma0: f64,
    eps0: f64,
    n: f64,
    delta: f64,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport> {
    cfg.validate()?;
    let plan = ConstrainedPlan::new(n, sigma0, eps0, delta)?;
    if !le(eps0, sigma0 / 3.0) {
        return Err(Error::pre(format!("constrained estimator needs ε0 ≤ σ0/3, got ε0 = {eps0}, σ0 = {sigma0}")));
    }
    let m = rv.moments();
    if !le(m.variance, sigma0 * sigma0) {
        return Err(Error::pre(format!(
            "constrained estimator needs Var X ≤ σ0² = {}, measured {}",
            sigma0 * sigma0,
            m.variance
        )));
    }
    if !le(m.mean.abs(), eps0) {
        return Err(Error::pre(format!("constrained estimator needs |E X| ≤ ε0 = {eps0}, measured {}", m.mean.abs())));
    }
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let est = constrained_core(rv, &plan, &mut r, &ledger, "constrained", cfg)?;
    Ok(EstimateReport::new(est, seed, &ledger))
}

/// Classical median of means over draws from `rv` with the `(n, δ)` layout of
/// [`MomPlan`].
pub fn median_of_means_rv(rv: &UniRv<f64>, n: f64, delta: f64, seed: u64) -> Result<EstimateReport> {
    let plan = MomPlan::new(n, delta)?;
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let sampler = rv.sampler();
    let values = rv.values();
    let est = median_of_means(|g| values[sampler.draw(g)], plan, &mut r, &ledger, "classical")?;
    Ok(EstimateReport::new(est, seed, &ledger))
}

/// Univariate estimator needing only `Var X ≤ σ0²`; then
/// `P[|μ̂ − E X| ≤ σ0/n] ≥ 1 − δ`.
pub fn notso_uni(
    rv: &UniRv<f64>,
    sigma0: f64,
    n: f64,
    delta: f64,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport> {
    cfg.validate()?;
    check_unit_interval(delta, "δ")?;
    if !(sigma0 >= 0.0) {
        return Err(Error::pre(format!("σ0 = {sigma0} must be nonnegative")));
    }
    let m = rv.moments();
    if !le(m.variance, sigma0 * sigma0) {
        return Err(Error::pre(format!("estimator needs Var X ≤ σ0² = {}, measured {}", sigma0 * sigma0, m.variance)));
    }
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let est = notso_core(rv, sigma0, n, delta, &mut r, &ledger, "", cfg)?;
    Ok(EstimateReport::new(est, seed, &ledger))
}

/// Relative-error estimator for `rv` with values in `[0, 1]`:
/// `P[|μ̃ − E X| ≤ √(E X)/n + 1/n²] ≥ 1 − δ`.
pub fn bounded_rel_estimator(
    rv: &UniRv<f64>,
    n: f64,
    delta: f64,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport> {
    cfg.validate()?;
    check_unit_interval(delta, "δ")?;
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::pre(format!("n = {n} must be positive")));
    }
    if let Some(i) = rv.values().iter().position(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidDistribution {
            index: Some(i),
            reason: format!("value {} outside [0, 1]", rv.values()[i]),
        });
    }
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let est = bounded_rel_core(rv, n, delta, &mut r, &ledger, "", cfg)?;
    Ok(EstimateReport::new(est, seed, &ledger))
}
