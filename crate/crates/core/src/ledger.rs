//! Oracle-access ledger and closed-form cost predictors.
//!
//! Two measures are tracked: quantum-experiment accesses and peak entangled
//! registers. Phase-estimation invocations and classical draws are recorded
//! alongside. Runtime charges happen where the work happens; [`predict`]
//! recomputes the same totals from the algorithms' parameter formulas, and the
//! two must agree exactly.

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi::{self, Inner};
use crate::uni;

/// Tunable constants shared by predictors and runtime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Accesses charged per Grover step (experiment plus inverse).
    pub grover_cost: u64,
    /// Tail-lemma constant `D`.
    #[serde(rename = "D")]
    pub d_const: f64,
    /// Quantile sandwich constant `C`.
    #[serde(rename = "C")]
    pub c_const: f64,
    /// Estimator runs per lattice point in the empirical V channel.
    pub t_emp: usize,
    /// Sample-count constant `a` of the simulated quantile estimator.
    pub quantile_a: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { grover_cost: 2, d_const: 2.0, c_const: 0.5, t_emp: 16, quantile_a: 64.0 }
    }
}

impl EstimatorConfig {
    /// Rejects out-of-domain constants.
    pub fn validate(&self) -> Result<()> {
        if self.grover_cost == 0 {
            return Err(Error::pre("grover_cost must be at least 1"));
        }
        if !(self.d_const > 0.0 && self.d_const.is_finite()) {
            return Err(Error::pre(format!("D = {} must be positive", self.d_const)));
        }
        if !(self.c_const > 0.0 && self.c_const < 1.0) {
            return Err(Error::pre(format!("C = {} must lie in (0, 1)", self.c_const)));
        }
        if self.t_emp == 0 {
            return Err(Error::pre("t_emp must be at least 1"));
        }
        if !(self.quantile_a >= 64.0) {
            return Err(Error::pre(format!(
                "quantile constant a = {} below 64 voids the sandwich guarantee",
                self.quantile_a
            )));
        }
        Ok(())
    }
}

/// Counters of one stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCost {
    /// Stage path, `/`-separated.
    pub stage: String,
    /// Quantum-experiment accesses (classical draws count one each).
    pub experiment_accesses: u64,
    /// Phase-estimation runs.
    pub pe_invocations: u64,
    /// Peak entangled registers needed by this stage.
    pub registers_peak: u64,
    /// Draws taken from the explicit distribution by the simulator.
    pub classical_draws: u64,
}

/// Totals and per-stage breakdown. Access, PE and draw totals are sums over
/// stages; `registers_peak` is the maximum since registers are reused.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    /// Total experiment accesses.
    pub experiment_accesses: u64,
    /// Total phase-estimation runs.
    pub pe_invocations: u64,
    /// Maximum register peak over stages.
    pub registers_peak: u64,
    /// Total simulator draws.
    pub classical_draws: u64,
    /// Stages sorted by path.
    pub stages: Vec<StageCost>,
}

impl CostReport {
    /// Report whose totals are derived from `stages`.
    pub fn from_stages(mut stages: Vec<StageCost>) -> Self {
        stages.sort_by(|a, b| a.stage.cmp(&b.stage));
        Self {
            experiment_accesses: stages.iter().map(|s| s.experiment_accesses).sum(),
            pe_invocations: stages.iter().map(|s| s.pe_invocations).sum(),
            registers_peak: stages.iter().map(|s| s.registers_peak).max().unwrap_or(0),
            classical_draws: stages.iter().map(|s| s.classical_draws).sum(),
            stages,
        }
    }

    /// True when the totals match the stage entries.
    pub fn is_consistent(&self) -> bool {
        *self == Self::from_stages(self.stages.clone())
    }
}

/// Thread-safe accumulating ledger.
#[derive(Debug, Default)]
pub struct CostLedger {
    stages: Mutex<BTreeMap<String, StageCost>>,
}

impl CostLedger {
    /// Empty ledger.
    pub fn new() -> Self {
        Self::default()
    }

    fn with_stage(&self, stage: &str, f: impl FnOnce(&mut StageCost)) {
        let mut map = self.stages.lock().unwrap_or_else(|e| e.into_inner());
        let entry = map
            .entry(stage.to_string())
            .or_insert_with(|| StageCost { stage: stage.to_string(), ..Default::default() });
        f(entry);
    }

    /// Adds experiment accesses; negative amounts are rejected.
    pub fn charge(&self, stage: &str, amount: i64) -> Result<()> {
        let amount =
            u64::try_from(amount).map_err(|_| Error::pre(format!("negative charge {amount} to stage `{stage}`")))?;
        self.with_stage(stage, |s| s.experiment_accesses += amount);
        Ok(())
    }

    /// Adds phase-estimation runs.
    pub fn record_pe(&self, stage: &str, count: u64) {
        self.with_stage(stage, |s| s.pe_invocations += count);
    }

    /// Raises the stage's register peak to at least `registers`.
    pub fn record_registers(&self, stage: &str, registers: u64) {
        self.with_stage(stage, |s| s.registers_peak = s.registers_peak.max(registers));
    }

    /// Adds simulator draws.
    pub fn record_draws(&self, stage: &str, draws: u64) {
        self.with_stage(stage, |s| s.classical_draws += draws);
    }

    /// Snapshot of the ledger.
    pub fn report(&self) -> CostReport {
        let map = self.stages.lock().unwrap_or_else(|e| e.into_inner());
        CostReport::from_stages(map.values().cloned().collect())
    }
}

/// Joins stage path components.
pub fn stage_path(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}/{name}")
    }
}

/// Estimator with the parameters its cost depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum Algorithm {
    /// Univariate refinement step.
    RefineUni { eps: f64, delta: f64 },
    /// Constrained univariate estimator.
    ConstrainedUni { n: f64, sigma0: f64, eps0: f64, delta: f64 },
    /// Classical median of means.
    MedianOfMeans { n: f64, delta: f64 },
    /// Univariate estimator with classical kickstart.
    NotsoUni { n: f64, sigma0: f64, delta: f64 },
    /// Relative-error estimator for variables in `[0, 1]`.
    BoundedRel { n: f64, delta: f64 },
    /// Multivariate refinement step.
    RefineMulti { d: usize, eps: f64, delta: f64 },
    /// Constrained simple multivariate estimator.
    ConstrainedSimple { d: usize, n: f64, sigma0: f64, eps0: f64, delta: f64 },
    /// Constrained meticulous multivariate estimator.
    ConstrainedMeticulous { d: usize, n: f64, sigma0: f64, delta: f64 },
    /// Classical geometric median of means.
    ClassicalMulti { n: f64, delta: f64 },
    /// Simulated quantile estimation.
    Quantile { p: f64, delta: f64 },
    /// Multivariate estimator with classical kickstart.
    NotsoMulti { d: usize, n: f64, sigma0: f64, delta: f64, inner: Inner },
    /// Full pipeline without prior bounds.
    Full { d: usize, n: f64, delta: f64, inner: Inner },
}

/// Flat parameter bag used to build an [`Algorithm`] from an identifier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlgorithmParams {
    /// Accuracy parameter `n`.
    pub n: Option<f64>,
    /// Confidence `δ`.
    pub delta: Option<f64>,
    /// Refinement accuracy `ε`.
    pub eps: Option<f64>,
    /// Initial mean bound `ε0`.
    pub eps0: Option<f64>,
    /// Variance bound `σ0`.
    pub sigma0: Option<f64>,
    /// Dimension.
    pub d: Option<usize>,
    /// Quantile level.
    pub p: Option<f64>,
    /// Inner multivariate estimator.
    pub inner: Option<Inner>,
}

impl Algorithm {
    /// Builds from a kebab-case identifier.
    pub fn from_id(id: &str, p: &AlgorithmParams) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::pre(format!("algorithm `{id}` needs --{name}")));
        let d = p.d.unwrap_or(1);
        let inner = p.inner.unwrap_or(Inner::Meticulous);
        Ok(match id {
            "refine-uni" => Algorithm::RefineUni { eps: need(p.eps, "eps")?, delta: need(p.delta, "delta")? },
            "constrained-uni" => Algorithm::ConstrainedUni {
                n: need(p.n, "n")?,
                sigma0: need(p.sigma0, "sigma0")?,
                eps0: need(p.eps0, "eps0")?,
                delta: need(p.delta, "delta")?,
            },
            "median-of-means" => Algorithm::MedianOfMeans { n: need(p.n, "n")?, delta: need(p.delta, "delta")? },
            "notso-uni" => Algorithm::NotsoUni {
                n: need(p.n, "n")?,
                sigma0: need(p.sigma0, "sigma0")?,
                delta: need(p.delta, "delta")?,
            },
            "bounded-rel" => Algorithm::BoundedRel { n: need(p.n, "n")?, delta: need(p.delta, "delta")? },
            "refine-multi" => Algorithm::RefineMulti { d, eps: need(p.eps, "eps")?, delta: need(p.delta, "delta")? },
            "constrained-simple" => Algorithm::ConstrainedSimple {
                d,
                n: need(p.n, "n")?,
                sigma0: need(p.sigma0, "sigma0")?,
                eps0: need(p.eps0, "eps0")?,
                delta: need(p.delta, "delta")?,
            },
            "constrained-meticulous" => Algorithm::ConstrainedMeticulous {
                d,
                n: need(p.n, "n")?,
                sigma0: need(p.sigma0, "sigma0")?,
                delta: need(p.delta, "delta")?,
            },
            "classical-multi" => Algorithm::ClassicalMulti { n: need(p.n, "n")?, delta: need(p.delta, "delta")? },
            "quantile" => Algorithm::Quantile { p: need(p.p, "p")?, delta: need(p.delta, "delta")? },
            "notso-multi" => Algorithm::NotsoMulti {
                d,
                n: need(p.n, "n")?,
                sigma0: need(p.sigma0, "sigma0")?,
                delta: need(p.delta, "delta")?,
                inner,
            },
            "full" => Algorithm::Full { d, n: need(p.n, "n")?, delta: need(p.delta, "delta")?, inner },
            other => return Err(Error::UnknownAlgorithm(other.to_string())),
        })
    }
}

/// Closed-form cost of `alg` under `cfg`.
pub fn predict(alg: &Algorithm, cfg: &EstimatorConfig) -> Result<CostReport> {
    cfg.validate()?;
    let mut stages = Vec::new();
    predict_into(alg, cfg, "", &mut stages)?;
    Ok(CostReport::from_stages(merge(stages)))
}

fn merge(stages: Vec<StageCost>) -> Vec<StageCost> {
    let mut map: BTreeMap<String, StageCost> = BTreeMap::new();
    for s in stages {
        let e =
            map.entry(s.stage.clone()).or_insert_with(|| StageCost { stage: s.stage.clone(), ..Default::default() });
        e.experiment_accesses += s.experiment_accesses;
        e.pe_invocations += s.pe_invocations;
        e.registers_peak = e.registers_peak.max(s.registers_peak);
        e.classical_draws += s.classical_draws;
    }
    map.into_values().collect()
}

fn stage(name: String, accesses: u64, pe: u64, registers: u64, draws: u64) -> StageCost {
    StageCost {
        stage: name,
        experiment_accesses: accesses,
        pe_invocations: pe,
        registers_peak: registers,
        classical_draws: draws,
    }
}

/// `Σ_ℓ M(δ'_ℓ)·N(ε'_ℓ)` and `Σ_ℓ M(δ'_ℓ)` of a constrained univariate run.
fn constrained_uni_sums(n: f64, sigma0: f64, eps0: f64, delta: f64) -> Result<(u64, u64, usize)> {
    let rounds = uni::constrained_rounds(n, sigma0, eps0);
    let deltas = uni::loglog_deltas(rounds, delta);
    let (mut steps, mut pes) = (0u64, 0u64);
    for (l, &dl) in deltas.iter().enumerate() {
        let eps_l = eps0 / (2f64.powi(l as i32) * 4.0 * sigma0);
        let m = uni::median_boost_count(dl)? as u64;
        steps += m * uni::refine_resolution(eps_l)?;
        pes += m;
    }
    Ok((steps, pes, rounds))
}

fn predict_into(alg: &Algorithm, cfg: &EstimatorConfig, prefix: &str, out: &mut Vec<StageCost>) -> Result<()> {
    let g = cfg.grover_cost;
    match *alg {
        Algorithm::RefineUni { eps, delta } => {
            let m = uni::median_boost_count(delta)? as u64;
            let n = uni::refine_resolution(eps)?;
            out.push(stage(stage_path(prefix, "refine"), m * n * g, m, 1, 0));
        }
        Algorithm::ConstrainedUni { n, sigma0, eps0, delta } => {
            uni::check_unit_interval(delta, "δ")?;
            let (steps, pes, rounds) = constrained_uni_sums(n, sigma0, eps0, delta)?;
            out.push(stage(stage_path(prefix, "constrained"), steps * g, pes, u64::from(rounds > 0), 0));
        }
        Algorithm::MedianOfMeans { n, delta } => {
            let plan = uni::MomPlan::new(n, delta)?;
            let draws = plan.draws() as u64;
            out.push(stage(stage_path(prefix, "classical"), draws, 0, 0, draws));
        }
        Algorithm::NotsoUni { n, sigma0, delta } => {
            uni::check_unit_interval(delta, "δ")?;
            predict_into(&Algorithm::MedianOfMeans { n: 9.0, delta: delta / 2.0 }, cfg, prefix, out)?;
            let inner = Algorithm::ConstrainedUni { n, sigma0, eps0: sigma0 / 3.0, delta: delta / 2.0 };
            predict_into(&inner, cfg, prefix, out)?;
        }
        Algorithm::BoundedRel { n, delta } => {
            uni::check_unit_interval(delta, "δ")?;
            let n1 = 2.0 * n * n;
            let s1 = Algorithm::NotsoUni { n: n1, sigma0: 1.0, delta: delta / 2.0 };
            predict_into(&s1, cfg, &stage_path(prefix, "stage1"), out)?;
            // Stage 2's cost does not depend on its data-driven σ0.
            let s2 = Algorithm::NotsoUni { n, sigma0: 1.0, delta: delta / 2.0 };
            predict_into(&s2, cfg, &stage_path(prefix, "stage2"), out)?;
        }
        Algorithm::RefineMulti { d, eps, delta } => {
            let plan = multi::RefineMultiPlan::new(d, eps, delta)?;
            let m = plan.trials as u64;
            out.push(stage(stage_path(prefix, "refine"), m * plan.resolution * g, m, 1, 0));
        }
        Algorithm::ConstrainedSimple { d, n, sigma0, eps0, delta } => {
            uni::check_unit_interval(delta, "δ")?;
            let k = multi::simple_scale(d, cfg.d_const);
            let rounds = uni::constrained_rounds(n, sigma0, eps0);
            let deltas = uni::loglog_deltas(rounds, delta);
            let (mut acc, mut pes) = (0u64, 0u64);
            for (l, &dl) in deltas.iter().enumerate() {
                let eps_l = eps0 / (2f64.powi(l as i32) * k * sigma0);
                let plan = multi::RefineMultiPlan::new(d, eps_l, dl)?;
                acc += plan.trials as u64 * plan.resolution * g;
                pes += plan.trials as u64;
            }
            out.push(stage(stage_path(prefix, "constrained"), acc, pes, u64::from(rounds > 0), 0));
        }
        Algorithm::ConstrainedMeticulous { d, n, sigma0, delta } => {
            uni::check_unit_interval(delta, "δ")?;
            if sigma0 == 0.0 {
                out.push(stage(stage_path(prefix, "meticulous"), 0, 0, 0, 0));
                return Ok(());
            }
            let plan = multi::MeticulousPlan::new(d, n, sigma0, delta, cfg)?;
            let (steps, pes, _) = constrained_uni_sums(plan.v_trials as f64, 1.0, 1.0 / 3.0, plan.v_delta)?;
            // V = U†·Q·U runs the quantized estimator twice.
            let per_v = 2 * steps * g;
            let m = plan.trials as u64;
            out.push(stage(stage_path(prefix, "meticulous"), m * per_v, m, pes, 0));
        }
        Algorithm::ClassicalMulti { n, delta } => {
            let plan = multi::ClassicalMultiPlan::new(n, delta)?;
            let draws = plan.draws() as u64;
            out.push(stage(stage_path(prefix, "classical"), draws, 0, 0, draws));
        }
        Algorithm::Quantile { p, delta } => {
            let plan = multi::QuantilePlan::new(p, delta, cfg.quantile_a)?;
            out.push(stage(stage_path(prefix, "quantile"), plan.quantum_cost, 0, 1, plan.samples as u64));
        }
        Algorithm::NotsoMulti { d, n, sigma0, delta, inner } => {
            uni::check_unit_interval(delta, "δ")?;
            let kick = multi::notso_kickstart_trials(cfg.d_const, delta);
            predict_into(&Algorithm::ClassicalMulti { n: kick, delta: delta / 2.0 }, cfg, prefix, out)?;
            let eps0 = multi::notso_eps0(cfg.d_const, sigma0);
            let inner_alg = match inner {
                Inner::Simple => Algorithm::ConstrainedSimple { d, n, sigma0, eps0, delta: delta / 2.0 },
                Inner::Meticulous => Algorithm::ConstrainedMeticulous { d, n, sigma0, delta: delta / 2.0 },
            };
            predict_into(&inner_alg, cfg, &stage_path(prefix, "inner"), out)?;
        }
        Algorithm::Full { d, n, delta, inner } => {
            uni::check_unit_interval(delta, "δ")?;
            let plan = multi::FullPlan::new(n, delta, cfg)?;
            let q = delta / 4.0;
            predict_into(
                &Algorithm::ClassicalMulti { n: plan.kickstart_trials, delta: q },
                cfg,
                &stage_path(prefix, "kickstart"),
                out,
            )?;
            predict_into(&Algorithm::Quantile { p: plan.p, delta: q }, cfg, prefix, out)?;
            predict_into(
                &Algorithm::BoundedRel { n: plan.rel_trials, delta: q },
                cfg,
                &stage_path(prefix, "bounded"),
                out,
            )?;
            // The inner run's cost does not depend on its data-driven σ0 > 0.
            let notso = Algorithm::NotsoMulti { d, n: plan.inner_trials, sigma0: 1.0, delta: q, inner };
            predict_into(&notso, cfg, &stage_path(prefix, "notso"), out)?;
        }
    }
    Ok(())
}
