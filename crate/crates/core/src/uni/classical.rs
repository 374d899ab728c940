use serde::Serialize;

use crate::error::{Error, Result};
use crate::ledger::CostLedger;
use crate::rng::Rng;

use super::boost::{check_unit_interval, median};

/// Bucket layout of the median-of-means estimator.
///
/// `k = max(1, ⌈8 ln(1/δ)⌉)` buckets of `⌈4n⌉` draws each. Chebyshev puts a
/// bucket mean within `√(Var/n)` with probability at least 3/4, and Hoeffding
/// over `k` buckets bounds the median's failure by `e^{−k/8} ≤ δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MomPlan {
    /// Number of buckets.
    pub buckets: usize,
    /// Draws per bucket.
    pub bucket_size: usize,
}

impl MomPlan {
    /// Plan for accuracy parameter `n > 0` and confidence `δ`.
    pub fn new(n: f64, delta: f64) -> Result<Self> {
        check_unit_interval(delta, "δ")?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::pre(format!("n = {n} must be positive")));
        }
        let buckets = ((8.0 * (1.0 / delta).ln()).ceil() as usize).max(1);
        Ok(Self { buckets, bucket_size: (4.0 * n).ceil() as usize })
    }

    /// Total draws.
    pub fn draws(&self) -> usize {
        self.buckets * self.bucket_size
    }
}

/// Median of bucket means over draws from `draw`. Each draw is charged as one
/// experiment access to `stage`.
pub fn median_of_means<F>(mut draw: F, plan: MomPlan, rng: &mut Rng, ledger: &CostLedger, stage: &str) -> Result<f64>
where
    F: FnMut(&mut Rng) -> f64,
{
    let mut means = Vec::with_capacity(plan.buckets);
    for _ in 0..plan.buckets {
        let mut s = 0.0;
        for _ in 0..plan.bucket_size {
            s += draw(rng);
        }
        means.push(s / plan.bucket_size as f64);
    }
    let draws = plan.draws() as u64;
    ledger.charge(stage, draws as i64)?;
    ledger.record_draws(stage, draws);
    Ok(median(&mut means))
}
