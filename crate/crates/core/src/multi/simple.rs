use serde::Serialize;

use crate::error::{Error, Result};
use crate::ledger::{CostLedger, EstimatorConfig};
use crate::phase::multidim_phase_estimate;
use crate::prob::FiniteDist;
use crate::rng::{self, Rng};
use crate::sim::{check_cap, LatticeSpec, StateVector};
use crate::spectrum::{key_lambda, GroverOperator};
use crate::uni::{check_unit_interval, constrained_rounds, loglog_deltas, median_boost_count, pow2_ceil};

use super::{coordinate_median, labeled, le, MultiEstimateReport};

/// Second-moment scale `s0 = √10/(360·d^{1/4})` of the lattice refinement step.
pub fn simple_s0(d: usize) -> f64 {
    10f64.sqrt() / (360.0 * (d as f64).powf(0.25))
}

/// Rescaling constant `K = 120·d^{1/4}·√(10D)` of the constrained simple estimator.
pub fn simple_scale(d: usize, d_const: f64) -> f64 {
    120.0 * (d as f64).powf(0.25) * (10.0 * d_const).sqrt()
}

/// Parameters of one lattice refinement step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefineMultiPlan {
    /// Dimension.
    pub d: usize,
    /// Accuracy `ε`.
    pub eps: f64,
    /// Confidence `δ`.
    pub delta: f64,
    /// Per-axis lattice resolution and Grover power `N = 2^⌈log₂(16π/ε)⌉`.
    pub resolution: u64,
    /// Median repetitions at confidence `δ/d`.
    pub trials: usize,
    /// Truncation scale `λ = 5/(4 − 5 s0²)`.
    pub lambda: f64,
}

impl RefineMultiPlan {
    /// Plan for `(d, ε, δ)`.
    pub fn new(d: usize, eps: f64, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::pre("dimension must be at least 1"));
        }
        check_unit_interval(delta, "δ")?;
        if !(eps > 0.0) {
            return Err(Error::pre(format!("refinement accuracy ε = {eps} must be positive")));
        }
        Ok(Self {
            d,
            eps,
            delta,
            resolution: pow2_ceil(16.0 * std::f64::consts::PI / eps)?,
            trials: median_boost_count(delta / d as f64)?,
            lambda: key_lambda(simple_s0(d)),
        })
    }

    /// Amplitudes needed for a distribution with `outcomes` outcomes.
    pub fn amplitudes(&self, outcomes: usize) -> u128 {
        (self.resolution as u128).saturating_pow(self.d as u32).saturating_mul(outcomes as u128)
    }
}

/// One lattice refinement step: per lattice point `u` the Grover operator on
/// the angles of `⟨u, X⟩` is raised to the power `N`, the lattice is read out,
/// and each of the `M` samples reads as `2π·fraction` per coordinate.
pub(crate) fn refine_multi_core(
    dist: &FiniteDist<f64>,
    plan: &RefineMultiPlan,
    rng: &mut Rng,
    ledger: &CostLedger,
    stage: &str,
    cfg: &EstimatorConfig,
) -> Result<Vec<f64>> {
    check_cap("lattice Grover state", plan.amplitudes(dist.len()))?;
    let n = plan.resolution as usize;
    let lat = LatticeSpec::new(plan.d, n)?;
    let clamp = 1.0 / (plan.lambda * plan.eps);
    let family = |_: usize, u: &[f64]| {
        let theta = dist.project_unchecked(u).map(|v| 2.0 * (0.5 * v.clamp(-clamp, clamp)).atan());
        GroverOperator::new_unchecked(&theta).matrix().clone()
    };
    let init = StateVector::synthesizer_state(&dist.probs())?;
    let table = multidim_phase_estimate(family, lat, &init, plan.resolution)?;
    let samples: Vec<Vec<f64>> = table
        .sample_with(rng, plan.trials)
        .into_iter()
        .map(|flat| table.fractions(flat).into_iter().map(|f| std::f64::consts::TAU * f).collect())
        .collect();
    ledger.charge(stage, (plan.trials as u64 * plan.resolution * cfg.grover_cost) as i64)?;
    ledger.record_pe(stage, plan.trials as u64);
    ledger.record_registers(stage, 1);
    Ok(coordinate_median(&samples, plan.d))
}

/// Lattice refinement step. Requires `ε ≤ 1/(900·d^{3/4})`, `‖E X‖_∞ ≤ √d·ε` and
/// `tr Σ ≤ (1/(120·d^{1/4}))²/(10D)`; then `‖μ̂ − E X‖_∞ ≤ ε/2` with probability
/// at least `1 − δ`.
pub fn refine_multi(
    dist: &FiniteDist<f64>,
    eps: f64,
    delta: f64,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<MultiEstimateReport> {
    cfg.validate()?;
    let d = dist.dim();
    let plan = RefineMultiPlan::new(d, eps, delta)?;
    let df = d as f64;
    if !le(eps, 1.0 / (900.0 * df.powf(0.75))) {
        return Err(Error::pre(format!(
            "lattice refinement needs ε ≤ 1/(900·d^{{3/4}}) = {}, got {eps}",
            1.0 / (900.0 * df.powf(0.75))
        )));
    }
    let mean_inf = dist.mean().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !le(mean_inf, df.sqrt() * eps) {
        return Err(Error::pre(format!(
            "lattice refinement needs ‖E X‖_∞ ≤ √d·ε = {}, measured {mean_inf}",
            df.sqrt() * eps
        )));
    }
    let tr_cap = (1.0 / (120.0 * df.powf(0.25))).powi(2) / (10.0 * cfg.d_const);
    let tr = dist.covariance().trace();
    if !le(tr, tr_cap) {
        return Err(Error::pre(format!("lattice refinement needs tr Σ ≤ {tr_cap:e}, measured {tr:e}")));
    }
    check_cap("lattice Grover state", plan.amplitudes(dist.len()))?;
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let est = refine_multi_core(dist, &plan, &mut r, &ledger, "refine", cfg)?;
    Ok(MultiEstimateReport::new(est, seed, &ledger))
}

/// Round layout of the constrained simple estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplePlan {
    /// Accuracy parameter `n`.
    pub n: f64,
    /// Trace bound `σ0` (`tr Σ ≤ σ0²`).
    pub sigma0: f64,
    /// Initial mean bound `ε0`.
    pub eps0: f64,
    /// Confidence `δ`.
    pub delta: f64,
    /// Rescaling constant `K`.
    pub scale: f64,
    /// Round plans with `ε'_ℓ = ε0/(2^{ℓ−1}·K·σ0)` and log-log `δ'_ℓ`.
    pub rounds: Vec<RefineMultiPlan>,
}

impl SimplePlan {
    /// Plan for `(d, n, σ0, ε0, δ)` under `D`.
    pub fn new(d: usize, n: f64, sigma0: f64, eps0: f64, delta: f64, d_const: f64) -> Result<Self> {
        check_unit_interval(delta, "δ")?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::pre(format!("n = {n} must be positive")));
        }
        if !(sigma0 >= 0.0 && eps0 >= 0.0) {
            return Err(Error::pre(format!("σ0 = {sigma0} and ε0 = {eps0} must be nonnegative")));
        }
        let scale = simple_scale(d, d_const);
        let t = constrained_rounds(n, sigma0, eps0);
        let rounds = loglog_deltas(t, delta)
            .iter()
            .enumerate()
            .map(|(l, &dl)| RefineMultiPlan::new(d, eps0 / (2f64.powi(l as i32) * scale * sigma0), dl))
            .collect::<Result<_>>()?;
        Ok(Self { n, sigma0, eps0, delta, scale, rounds })
    }

    /// Fails fast when any round exceeds the amplitude cap.
    pub fn check_cap(&self, outcomes: usize) -> Result<()> {
        for (l, r) in self.rounds.iter().enumerate() {
            check_cap(
                &format!("lattice Grover state of round {} (N = {})", l + 1, r.resolution),
                r.amplitudes(outcomes),
            )?;
        }
        Ok(())
    }
}

/// Rounds of lattice refinement on `(X − μ̃)/(Kσ0)`, accumulating `μ̃ += Kσ0·μ_ℓ`.
pub(crate) fn simple_core(
    dist: &FiniteDist<f64>,
    plan: &SimplePlan,
    rng: &mut Rng,
    ledger: &CostLedger,
    stage: &str,
    cfg: &EstimatorConfig,
) -> Result<Vec<f64>> {
    plan.check_cap(dist.len())?;
    ledger.charge(stage, 0)?;
    let scale = plan.scale * plan.sigma0;
    let mut mu = vec![0.0; dist.dim()];
    for round in &plan.rounds {
        let y = dist.shift_scale(&mu, scale)?;
        let step = refine_multi_core(&y, round, rng, ledger, stage, cfg)?;
        for (m, s) in mu.iter_mut().zip(step) {
            *m += scale * s;
        }
    }
    Ok(mu)
}

/// Constrained simple estimator. Requires `tr Σ ≤ σ0²` and
/// `‖E X‖₂ ≤ ε0 ≤ (2/15)·√(10D)·σ0`; then `‖μ̂ − E X‖_∞ ≤ σ0/n` with probability
/// at least `1 − δ`.
pub fn constrained_simple(
    dist: &FiniteDist<f64>,
    n: f64,
    sigma0: f64,
    eps0: f64,
    delta: f64,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<MultiEstimateReport> {
    cfg.validate()?;
    let plan = SimplePlan::new(dist.dim(), n, sigma0, eps0, delta, cfg.d_const)?;
    let eps_cap = 2.0 / 15.0 * (10.0 * cfg.d_const).sqrt() * sigma0;
    if !le(eps0, eps_cap) {
        return Err(Error::pre(format!(
            "constrained simple estimator needs ε0 ≤ (2/15)√(10D)σ0 = {eps_cap}, got {eps0}"
        )));
    }
    let tr = dist.covariance().trace();
    if !le(tr, sigma0 * sigma0) {
        return Err(Error::pre(format!(
            "constrained simple estimator needs tr Σ ≤ σ0² = {}, measured {tr}",
            sigma0 * sigma0
        )));
    }
    let mean_norm = dist.mean().iter().map(|v| v * v).sum::<f64>().sqrt();
    if !le(mean_norm, eps0) {
        return Err(Error::pre(format!(
            "constrained simple estimator needs ‖E X‖₂ ≤ ε0 = {eps0}, measured {mean_norm}"
        )));
    }
    plan.check_cap(dist.len())?;
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let est = labeled("constrained", simple_core(dist, &plan, &mut r, &ledger, "constrained", cfg))?;
    Ok(MultiEstimateReport::new(est, seed, &ledger))
}
