use serde::Serialize;

use crate::error::{Error, Result};
use crate::ledger::{stage_path, CostLedger, EstimatorConfig};
use crate::prob::{FiniteDist, UniRv};
use crate::rng::{self, Rng};
use crate::uni::{bounded_rel_core, check_unit_interval, EstimateReport};

use super::classical::{classical_multi_core, quantile_core, ClassicalMultiPlan, QuantilePlan};
use super::meticulous::{meticulous_core, MeticulousPlan, VCertificateSummary};
use super::simple::{simple_core, SimplePlan};
use super::{labeled, le, Inner, MultiEstimateReport, VMode};

/// Classical geometric median of means with `(n, δ)` layout
/// [`ClassicalMultiPlan`]: `‖μ̃ − E X‖₂ ≤ √(tr Σ/n)·(1 + √(1/ln(1/δ)))` with
/// probability at least `1 − δ`.
pub fn classical_multi(dist: &FiniteDist<f64>, n: f64, delta: f64, seed: u64) -> Result<MultiEstimateReport> {
    let plan = ClassicalMultiPlan::new(n, delta)?;
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let est = classical_multi_core(dist, plan, &mut r, &ledger, "classical")?;
    Ok(MultiEstimateReport::new(est, seed, &ledger))
}

/// Simulated quantile estimate `Q̃` with `Q(p) ≤ Q̃ ≤ Q(p/2)` with probability at
/// least `1 − δ`; see [`QuantilePlan`].
pub fn quantile_estimate(
    rv: &UniRv<f64>,
    p: f64,
    delta: f64,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport> {
    cfg.validate()?;
    let plan = QuantilePlan::new(p, delta, cfg.quantile_a)?;
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let q = quantile_core(rv, &plan, &mut r, &ledger, "quantile")?;
    Ok(EstimateReport::new(q, seed, &ledger))
}

/// Kickstart size `⌈(225/4)·10D·(1 + √(1/ln(2/δ)))²⌉`, which puts the classical
/// estimate within `(2/15)·√(10D)·σ0` of the mean.
pub fn notso_kickstart_trials(d_const: f64, delta: f64) -> f64 {
    (225.0 / 4.0 * 10.0 * d_const * (1.0 + (1.0 / (2.0 / delta).ln()).sqrt()).powi(2)).ceil()
}

/// Mean bound `ε0 = (2/15)·√(10D)·σ0` handed to the inner estimator.
pub fn notso_eps0(d_const: f64, sigma0: f64) -> f64 {
    2.0 / 15.0 * (10.0 * d_const).sqrt() * sigma0
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn notso_multi_core(
    dist: &FiniteDist<f64>,
    n: f64,
    sigma0: f64,
    delta: f64,
    inner: Inner,
    mode: VMode,
    rng: &mut Rng,
    ledger: &CostLedger,
    prefix: &str,
    cfg: &EstimatorConfig,
) -> Result<(Vec<f64>, Option<VCertificateSummary>)> {
    let kick = ClassicalMultiPlan::new(notso_kickstart_trials(cfg.d_const, delta), delta / 2.0)?;
    let stage = stage_path(prefix, "classical");
    let mu1 = labeled(&stage, classical_multi_core(dist, kick, rng, ledger, &stage))?;
    let centred = dist.shift_scale(&mu1, 1.0)?;
    let inner_prefix = stage_path(prefix, "inner");
    let (mu2, cert) = match inner {
        Inner::Simple => {
            let stage = stage_path(&inner_prefix, "constrained");
            let plan =
                SimplePlan::new(dist.dim(), n, sigma0, notso_eps0(cfg.d_const, sigma0), delta / 2.0, cfg.d_const)?;
            (labeled(&stage, simple_core(&centred, &plan, rng, ledger, &stage, cfg))?, None)
        }
        Inner::Meticulous => {
            let stage = stage_path(&inner_prefix, "meticulous");
            let plan = MeticulousPlan::new(dist.dim(), n, sigma0, delta / 2.0, cfg)?;
            labeled(&stage, meticulous_core(&centred, &plan, mode, rng, ledger, &stage, cfg))?
        }
    };
    Ok((mu1.iter().zip(&mu2).map(|(a, b)| a + b).collect(), cert))
}

/// Multivariate estimator needing only `tr Σ ≤ σ0²`: a classical kickstart at
/// `δ/2` followed by the inner constrained estimator at `δ/2`. Then
/// `‖μ̂ − E X‖_∞ ≤ σ0/n` with probability at least `1 − δ`.
#[allow(clippy::too_many_arguments)]
pub fn notso_multi(
    dist: &FiniteDist<f64>,
    n: f64,
    sigma0: f64,
    delta: f64,
    inner: Inner,
    mode: VMode,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<MultiEstimateReport> {
    cfg.validate()?;
    check_unit_interval(delta, "δ")?;
    if !(sigma0 >= 0.0) {
        return Err(Error::pre(format!("σ0 = {sigma0} must be nonnegative")));
    }
    let tr = dist.covariance().trace();
    if !le(tr, sigma0 * sigma0) {
        return Err(Error::pre(format!("estimator needs tr Σ ≤ σ0² = {}, measured {tr}", sigma0 * sigma0)));
    }
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let (est, cert) = notso_multi_core(dist, n, sigma0, delta, inner, mode, &mut r, &ledger, "", cfg)?;
    let mut report = MultiEstimateReport::new(est, seed, &ledger);
    report.v_certificate = cert;
    Ok(report)
}

/// Derived parameters of the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullPlan {
    /// Accuracy parameter `n`.
    pub n: f64,
    /// Confidence `δ`.
    pub delta: f64,
    /// Quantile level `p = 25/(52·C·n²)`.
    pub p: f64,
    /// Kickstart size `⌈25·(1 + √(1/ln(4/δ)))²⌉`.
    pub kickstart_trials: f64,
    /// Accuracy `4/√p` of the relative-error stage.
    pub rel_trials: f64,
    /// Accuracy `2·√(52/25)·n` of the inner estimator.
    pub inner_trials: f64,
}

impl FullPlan {
    /// Plan for `(n, δ)`.
    pub fn new(n: f64, delta: f64, cfg: &EstimatorConfig) -> Result<Self> {
        check_unit_interval(delta, "δ")?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::pre(format!("n = {n} must be positive")));
        }
        let p = 25.0 / (52.0 * cfg.c_const * n * n);
        if !(p < 1.0) {
            return Err(Error::pre(format!("quantile level p = 25/(52·C·n²) = {p} must be below 1; increase n")));
        }
        Ok(Self {
            n,
            delta,
            p,
            kickstart_trials: (25.0 * (1.0 + (1.0 / (4.0 / delta).ln()).sqrt()).powi(2)).ceil(),
            rel_trials: 4.0 / p.sqrt(),
            inner_trials: 2.0 * (52.0f64 / 25.0).sqrt() * n,
        })
    }
}

/// Stage certificates of the full pipeline, evaluated on the explicit
/// distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullCertificates {
    /// `‖μ' − E X‖₂` after the kickstart.
    pub kickstart_error: f64,
    /// Kickstart target `√(tr Σ)/5`.
    pub kickstart_target: f64,
    /// Threshold `K` returned by the quantile stage.
    pub threshold: f64,
    /// `Q(p)` of `‖X − μ'‖₂`.
    pub quantile_low: f64,
    /// `Q(C·p)` of `‖X − μ'‖₂`.
    pub quantile_high: f64,
    /// `Q(p) ≤ K ≤ Q(C·p)`.
    pub quantile_ok: bool,
    /// `E‖Y‖²/K²`.
    pub truncated_moment: f64,
    /// Level `p`.
    pub p: f64,
    /// `E‖Y‖² ≥ K²·p`.
    pub truncation_ok: bool,
    /// Relative-error estimate `s'²` before flooring.
    pub rel_estimate: f64,
    /// `√E/n_int + 1/n_int²` at `n_int = 4/√p`.
    pub rel_bound: f64,
    /// `|s'² − E| ≤ √E/n_int + 1/n_int²`.
    pub rel_ok: bool,
    /// `|s'² − E| ≤ E/3`.
    pub rel_third_ok: bool,
    /// `σ0` handed to the inner stage.
    pub sigma0: f64,
    /// `K = 0`: the centred variable is identically zero past the kickstart.
    pub degenerate: bool,
}

impl FullCertificates {
    /// Quantile sandwich, truncation moment inequality and relative-error bound.
    pub fn all_hold(&self) -> bool {
        self.quantile_ok && self.truncation_ok && self.rel_ok
    }
}

#[allow(clippy::too_many_arguments)]
fn full_core(
    dist: &FiniteDist<f64>,
    plan: &FullPlan,
    inner: Inner,
    mode: VMode,
    rng: &mut Rng,
    ledger: &CostLedger,
    cfg: &EstimatorConfig,
) -> Result<(Vec<f64>, FullCertificates, Option<VCertificateSummary>)> {
    let q = plan.delta / 4.0;
    let kick = ClassicalMultiPlan::new(plan.kickstart_trials, q)?;
    let mu1 = labeled("kickstart", classical_multi_core(dist, kick, rng, ledger, "kickstart/classical"))?;
    let mean = dist.mean();
    let tr = dist.covariance().trace();

    let z = dist.shift_scale(&mu1, 1.0)?;
    let norms = z.norm_rv();
    let qplan = QuantilePlan::new(plan.p, q, cfg.quantile_a)?;
    let k = labeled("quantile", quantile_core(&norms, &qplan, rng, ledger, "quantile"))?;
    let q_lo = norms.upper_quantile(plan.p);
    let q_hi = norms.upper_quantile(cfg.c_const * plan.p);

    let y = z.truncate(k)?;
    let degenerate = k <= 0.0;
    let w = if degenerate {
        UniRv::constant(0.0)
    } else {
        norms.map(|v| if v > k { 0.0 } else { (v / k).powi(2).min(1.0) })
    };
    let e = w.moments().mean;
    let s_sq = labeled("bounded", bounded_rel_core(&w, plan.rel_trials, q, rng, ledger, "bounded", cfg))?;
    let rel_bound = e.sqrt() / plan.rel_trials + 1.0 / (plan.rel_trials * plan.rel_trials);
    let s_floor = s_sq.max(2.0 * plan.p / 3.0);
    let sigma0 = (1.5f64).sqrt() * k * s_floor.sqrt();

    let (mu2, vcert) = notso_multi_core(&y, plan.inner_trials, sigma0, q, inner, mode, rng, ledger, "notso", cfg)?;

    let certs = FullCertificates {
        kickstart_error: mu1.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
        kickstart_target: tr.sqrt() / 5.0,
        threshold: k,
        quantile_low: q_lo,
        quantile_high: q_hi,
        quantile_ok: le(q_lo, k) && le(k, q_hi),
        truncated_moment: e,
        p: plan.p,
        truncation_ok: degenerate || e >= plan.p * (1.0 - 1e-12),
        rel_estimate: s_sq,
        rel_bound,
        rel_ok: (s_sq - e).abs() <= rel_bound * (1.0 + 1e-12),
        rel_third_ok: (s_sq - e).abs() <= e / 3.0 * (1.0 + 1e-12),
        sigma0,
        degenerate,
    };
    Ok((mu1.iter().zip(&mu2).map(|(a, b)| a + b).collect(), certs, vcert))
}

/// Multivariate estimator with no prior bounds: `‖μ̂ − E X‖_∞ ≤ √(tr Σ)/n` with
/// probability at least `1 − δ`.
///
/// Stages: classical kickstart `μ'`, quantile threshold `K` of `‖X − μ'‖₂`,
/// truncation `Y`, relative-error estimate of `E(‖Y‖/K)²` setting `σ0`, and the
/// kickstarted inner estimator on `Y`. Stage errors carry the stage name.
pub fn full_estimator(
    dist: &FiniteDist<f64>,
    n: f64,
    delta: f64,
    inner: Inner,
    mode: VMode,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<MultiEstimateReport> {
    cfg.validate()?;
    let plan = FullPlan::new(n, delta, cfg)?;
    let ledger = CostLedger::new();
    let mut r = rng::rng(seed);
    let (est, certs, vcert) = full_core(dist, &plan, inner, mode, &mut r, &ledger, cfg)?;
    let mut report = MultiEstimateReport::new(est, seed, &ledger);
    if certs.degenerate {
        report.flags.push("quantile threshold is zero; inner stage ran on the zero variable".into());
    }
    report.certificates = Some(certs);
    report.v_certificate = vcert;
    Ok(report)
}
