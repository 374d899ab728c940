use serde::Serialize;

use crate::error::{Error, Result};
use crate::ledger::CostLedger;
use crate::prob::{FiniteDist, UniRv};
use crate::rng::Rng;
use crate::uni::check_unit_interval;

/// Draw layout of the classical multivariate estimator: `T = ⌈n⌉·⌈ln(1/δ)⌉`
/// draws split into `k = max(1, ⌈8 ln(1/δ)⌉)` buckets of `max(1, ⌊T/k⌋)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassicalMultiPlan {
    /// Nominal draw budget `T`.
    pub budget: usize,
    /// Bucket count `k`.
    pub buckets: usize,
    /// Draws per bucket.
    pub bucket_size: usize,
}

impl ClassicalMultiPlan {
    /// Plan for `(n, δ)`.
    pub fn new(n: f64, delta: f64) -> Result<Self> {
        check_unit_interval(delta, "δ")?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::pre(format!("n = {n} must be positive")));
        }
        let l = (1.0 / delta).ln();
        let budget = n.ceil() as usize * (l.ceil() as usize).max(1);
        let buckets = ((8.0 * l).ceil() as usize).max(1);
        Ok(Self { budget, buckets, bucket_size: (budget / buckets).max(1) })
    }

    /// Draws actually taken.
    pub fn draws(&self) -> usize {
        self.buckets * self.bucket_size
    }
}

/// Geometric median by Weiszfeld iteration with the Vardi–Zhang step at
/// coincident points; stops when an update moves less than `tol`.
pub fn geometric_median(points: &[Vec<f64>], tol: f64) -> Vec<f64> {
    assert!(!points.is_empty(), "geometric median of an empty set");
    let d = points[0].len();
    let mut y: Vec<f64> = (0..d).map(|a| points.iter().map(|p| p[a]).sum::<f64>() / points.len() as f64).collect();
    for _ in 0..10_000 {
        let mut num = vec![0.0; d];
        let mut wsum = 0.0;
        let mut coincide = 0usize;
        for p in points {
            let dist = p.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if dist <= 1e-300 {
                coincide += 1;
                continue;
            }
            let w = 1.0 / dist;
            wsum += w;
            for a in 0..d {
                num[a] += w * p[a];
            }
        }
        if wsum == 0.0 {
            return y;
        }
        let t: Vec<f64> = num.iter().map(|v| v / wsum).collect();
        let next = if coincide == 0 {
            t
        } else {
            // r = ‖Σ w_i (x_i − y)‖; the coincident mass pulls toward y.
            let r = t.iter().zip(&y).map(|(a, b)| (wsum * (a - b)).powi(2)).sum::<f64>().sqrt();
            if r <= coincide as f64 {
                return y;
            }
            let g = coincide as f64 / r;
            t.iter().zip(&y).map(|(a, b)| (1.0 - g) * a + g * b).collect()
        };
        let step = next.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        y = next;
        if step <= tol {
            break;
        }
    }
    y
}

/// Geometric median of bucket means; every draw is one experiment access.
pub(crate) fn classical_multi_core(
    dist: &FiniteDist<f64>,
    plan: ClassicalMultiPlan,
    rng: &mut Rng,
    ledger: &CostLedger,
    stage: &str,
) -> Result<Vec<f64>> {
    let sampler = crate::prob::IndexSampler::new(&dist.probs());
    let d = dist.dim();
    let outcomes = dist.outcomes();
    let means: Vec<Vec<f64>> = (0..plan.buckets)
        .map(|_| {
            let mut acc = vec![0.0; d];
            for _ in 0..plan.bucket_size {
                for (a, v) in acc.iter_mut().zip(&outcomes[sampler.draw(rng)].x) {
                    *a += v;
                }
            }
            acc.iter().map(|v| v / plan.bucket_size as f64).collect()
        })
        .collect();
    let draws = plan.draws() as u64;
    ledger.charge(stage, draws as i64)?;
    ledger.record_draws(stage, draws);
    Ok(geometric_median(&means, 1e-10))
}

/// Simulated quantile estimation.
///
/// Draws `m = ⌈a ln(1/δ)/p⌉` samples and returns the `r`-th largest with
/// `r = ⌈3pm/4⌉`. Chernoff bounds give `P[Q(p) ≤ Q̃ ≤ Q(p/2)] ≥ 1 − δ² − δ^{8/3}`
/// for `a = 64`, which is at least `1 − δ` for `δ ≤ 1/2`. The ledger charges the
/// quantum cost `⌈a ln(1/δ)/√p⌉`; the simulator's draws are recorded apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantilePlan {
    /// Level `p`.
    pub p: f64,
    /// Confidence `δ`.
    pub delta: f64,
    /// Samples drawn by the simulator.
    pub samples: usize,
    /// Order statistic rank from the top.
    pub rank: usize,
    /// Charged quantum cost.
    pub quantum_cost: u64,
}

impl QuantilePlan {
    /// Plan for `(p, δ)` with sample constant `a`.
    pub fn new(p: f64, delta: f64, a: f64) -> Result<Self> {
        check_unit_interval(p, "quantile level p")?;
        check_unit_interval(delta, "δ")?;
        if delta > 0.5 {
            return Err(Error::pre(format!("quantile estimation needs δ ≤ 1/2, got {delta}")));
        }
        let l = (1.0 / delta).ln();
        let samples = (a * l / p).ceil() as usize;
        let rank = ((0.75 * p * samples as f64).ceil() as usize).clamp(1, samples);
        Ok(Self { p, delta, samples, rank, quantum_cost: (a * l / p.sqrt()).ceil() as u64 })
    }
}

pub(crate) fn quantile_core(
    rv: &UniRv<f64>,
    plan: &QuantilePlan,
    rng: &mut Rng,
    ledger: &CostLedger,
    stage: &str,
) -> Result<f64> {
    let sampler = rv.sampler();
    let values = rv.values();
    let mut draws: Vec<f64> = (0..plan.samples).map(|_| values[sampler.draw(rng)]).collect();
    let idx = plan.rank - 1;
    let (_, q, _) = draws.select_nth_unstable_by(idx, |a, b| b.total_cmp(a));
    let q = *q;
    ledger.charge(stage, plan.quantum_cost as i64)?;
    ledger.record_draws(stage, plan.samples as u64);
    ledger.record_registers(stage, 1);
    Ok(q)
}
